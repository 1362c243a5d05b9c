from .types import (
    CategorySet,
    AttributeSet,
    SubgroupPartition,
    DescriptionRecord,
    Kind,
    Corpus,
    load_categories,
)
from .questions import QuestionKind, QuestionTemplate, TEMPLATES, render_question
from .parsing import parse_list_answer
from .client import LlmClient, LiveLlmClient, client_from_env
from .mock import MockLlmClient, SCENE_LEXICON
from .acquire import (
    acquire_attributes,
    filter_attributes,
    acquire_descriptions,
    partition_subgroups,
    acquire_relationship_descriptions,
    ingest_captions,
    match_categories,
)
from .corpus_io import (
    save_corpus,
    load_corpus,
    save_attributes,
    load_attributes,
    save_partition,
    load_partition,
)

__all__ = [
    "CategorySet", "AttributeSet", "SubgroupPartition", "DescriptionRecord",
    "Kind", "Corpus", "load_categories",
    "QuestionKind", "QuestionTemplate", "TEMPLATES", "render_question",
    "parse_list_answer",
    "LlmClient", "LiveLlmClient", "client_from_env", "MockLlmClient",
    "SCENE_LEXICON",
    "acquire_attributes", "filter_attributes", "acquire_descriptions",
    "partition_subgroups", "acquire_relationship_descriptions",
    "ingest_captions", "match_categories",
    "save_corpus", "load_corpus", "save_attributes", "load_attributes",
    "save_partition", "load_partition",
]
