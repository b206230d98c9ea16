"""CoTagRank: topic-aware unsupervised keyphrase extraction.

Fuses LDA topic vectors with contextual sentence embeddings and ranks
candidate phrases by a biased PageRank over a phrase graph, with windowed
and positional variants, Wikipedia-based keyphrase expansion, and an
evaluation harness.
"""

from .candidates import CandidatePhrase, extract_candidates
from .corpus import Corpus, Document, Token, load_dataset, tokenize
from .embedding import EmbeddingBackendConfig, FusedEmbedding, cosine
from .lda import TopicModel, TopicModelConfig, fit_lda
from .ranking import RankingConfig, extract, rank_document

__all__ = [
    "CandidatePhrase", "extract_candidates",
    "Corpus", "Document", "Token", "load_dataset", "tokenize",
    "EmbeddingBackendConfig", "FusedEmbedding", "cosine",
    "TopicModel", "TopicModelConfig", "fit_lda",
    "RankingConfig", "extract", "rank_document",
]

__version__ = "0.1.0"
