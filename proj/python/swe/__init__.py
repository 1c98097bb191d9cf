"""Static sentence embeddings built from sentence transformers."""

from ._core import (
    DataError,
    EmbeddingTable,
    FormatError,
    IoError,
    PcaTransform,
    SweError,
    average_subwords,
    build_vocab,
    contrastive_grad,
    contrastive_loss,
    cosine_matrix,
    decontextualize,
    encode,
    ensemble_encode,
    fit_sentence_pca,
    fit_word_pca,
    kd_grad,
    kd_loss,
    load_pca,
    load_table,
    pearson,
    pretransform,
    project_components,
    retrieval_eval,
    run_cli,
    save_pca,
    save_table,
    sif_reweight,
    spearman,
    unigram_probabilities,
)

__version__ = "1.0.0"
