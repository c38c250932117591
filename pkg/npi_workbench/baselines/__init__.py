"""Flat sequence-to-sequence LSTM baselines."""

from npi_workbench.baselines.formats import (SEQ_TASKS, SeqPair, format_add_easy, format_add_plain,
                                             format_add_stacked, format_sort_seq, parse_add_easy, parse_add_plain,
                                             parse_add_stacked, seq_example, to_pair)
from npi_workbench.baselines.seq2seq import (Seq2SeqConfig, Seq2SeqModel, load_seq2seq, s2s_eval,
                                             s2s_loss_and_grads, s2s_train, save_seq2seq)

__all__ = [
    "SEQ_TASKS", "SeqPair", "format_add_easy", "format_add_plain", "format_add_stacked", "format_sort_seq",
    "parse_add_easy", "parse_add_plain", "parse_add_stacked", "seq_example", "to_pair",
    "Seq2SeqConfig", "Seq2SeqModel", "load_seq2seq", "s2s_eval", "s2s_loss_and_grads", "s2s_train",
    "save_seq2seq",
]
