"""Cross-lingual word embedding alignment for social-media text.

Builds a synthetic bilingual dictionary from tokens shared verbatim by two
corpora (numerals, emoji, emoticons, spelling-identical words), learns an
orthogonal map between the two embedding spaces, optionally refines the
shared space by frequency-weighted averaging of the paired vectors, and
evaluates via word translation (P@k) and a frozen-embedding sentiment
transfer probe.
"""

__version__ = "0.1.0"

from .corpus import (
    CorpusStats,
    TokenClass,
    TokenizerConfig,
    Vocabulary,
    build_vocabulary,
    classify_token,
    scan_corpus,
    tokenize,
)
from .embeddings import (
    DEFAULT_NORMALIZE,
    EmbeddingFormatError,
    EmbeddingSpace,
    load_embeddings,
    make_space,
    normalize,
    save_embeddings,
)
from .lexicon import (
    BilingualDictionary,
    CoverageStats,
    TestDictionary,
    build_identical_dictionary,
    dictionary_from_pairs,
    filter_by_class,
    load_test_dictionary,
    sample_seed,
)
from .mapper import (
    AlignmentModel,
    SelfLearnConfig,
    apply_mapping,
    reweight,
    self_learn,
    solve_procrustes,
)
from .refine import (
    CrossLingualSpace,
    average_plain,
    average_weighted,
    meemi_transform,
)
from .translate import TranslationReport, precision_at_k, translate_topk
from .sentiment import (
    ProbeModel,
    SentimentDataset,
    SentimentReport,
    embed_sentence,
    eval_majority,
    eval_probe,
    load_sentiment_tsv,
    train_probe,
)
from .ablation import AblationTable, run_ablation
from .pipeline import PipelineConfig, PipelineError, run_pipeline
