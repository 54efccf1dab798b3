"""Employee-attrition benchmark toolkit: tabular loading, preprocessing, SMOTE,
seven from-scratch classifiers, weighted metrics and an LLM fine-tuning client."""

__version__ = "0.1.0"
