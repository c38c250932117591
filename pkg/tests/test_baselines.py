import numpy as np
import pytest

from npi_workbench.baselines import (Seq2SeqConfig, Seq2SeqModel, format_add_easy, format_add_plain,
                                     format_add_stacked, format_sort_seq, load_seq2seq, parse_add_easy,
                                     parse_add_plain, parse_add_stacked, s2s_eval, s2s_loss_and_grads, s2s_train,
                                     seq_example, to_pair)
from npi_workbench.baselines.formats import END, tokenize
from npi_workbench.csvlog import read_rows
from npi_workbench.errors import CheckpointError, ConfigurationError, InputError
from npi_workbench.model.checkpoint import load_checkpoint, save_checkpoint
from npi_workbench.nn.gradcheck import grad_check
from npi_workbench.oracles.traceio import SeqExample
from npi_workbench.training import TrainConfig

TINY = Seq2SeqConfig(layers=2, size=6, embedding_size=4)
TINY_ALIGNED = TINY.updated(channels=2, aligned=True)


def test_addition_formats():
    assert format_add_plain(90, 160) == "90X160X250"
    assert format_add_stacked(90, 160) == ("090XXXX", "061XXXX", "XXXX250")
    assert format_add_stacked(5, 5) == ("5XX", "5XX", "X10")
    assert parse_add_stacked("5XX", "5XX", "X10") == (5, 5, 10)
    assert format_add_easy(90, 160) == ("090", "061", "052")
    assert format_add_easy(5, 5) == ("50", "50", "01")
    assert parse_add_plain("90X160X250") == (90, 160, 250)
    assert parse_add_stacked("090XXXX", "061XXXX", "XXXX250") == (90, 160, 250)
    assert parse_add_easy("090", "061", "052") == (90, 160, 250)


def test_sort_format():
    assert format_sort_seq([9, 2, 5]) == ((9, 2, 5, END), (2, 5, 9, END))
    with pytest.raises(InputError):
        format_sort_seq([])
    with pytest.raises(InputError):
        format_sort_seq([12, 3])


@pytest.mark.parametrize("call", [
    lambda: parse_add_plain("90+160=250"),
    lambda: parse_add_stacked("abc", "061XXXX", "XXXX250"),
    lambda: format_add_plain(-3, 4),
    lambda: tokenize("12Y"),
    lambda: seq_example("add-fancy", "1+2"),
])
def test_malformed_sequences(call):
    with pytest.raises(InputError):
        call()


def test_seq_examples():
    assert seq_example("sort", "9,2,5") == SeqExample("sort", "925", "259")
    assert seq_example("add-plain", "90+160") == SeqExample("add-plain", "90X160X", "250")
    assert seq_example("add-stacked", "90+160") == SeqExample("add-stacked", "090XXXX|061XXXX", "XXXX250")
    assert seq_example("add-easy", "90+160") == SeqExample("add-easy", "090|061", "052")


def test_pairs():
    pair = to_pair(seq_example("sort", "9,2,5"))
    assert pair.source == ((9,), (2,), (5,), (END,))
    assert pair.target == (2, 5, 9, END)
    aligned = to_pair(seq_example("add-easy", "90+160"))
    assert aligned.source == ((0, 0), (9, 6), (0, 1))
    assert aligned.target == (0, 5, 2)
    assert aligned.channels == 2
    with pytest.raises(InputError):
        to_pair(SeqExample("add-easy", "12|34", "5"))


@pytest.mark.parametrize("config,example", [
    (TINY, ("sort", "9,2,5")),
    (TINY, ("add-plain", "7+15")),
    (TINY_ALIGNED, ("add-easy", "90+160")),
    (TINY_ALIGNED, ("add-stacked", "48+7")),
])
def test_seq2seq_gradients(config, example):
    model = Seq2SeqModel.create(config)
    pairs = [to_pair(seq_example(*example))]
    assert grad_check(lambda params: s2s_loss_and_grads(model, pairs), model.params, samples_per_block=4) < 1e-4


def test_aligned_model_has_no_decoder():
    model = Seq2SeqModel.create(TINY_ALIGNED)
    assert not model.params.with_prefix("dec")
    assert model.params.with_prefix("enc")
    with pytest.raises(ConfigurationError):
        model.predict([(1,), (2,)])


def test_prediction_lengths():
    source = to_pair(seq_example("sort", "3,1,2")).source
    output = Seq2SeqModel.create(TINY).predict(source)
    assert 1 <= len(output) <= 2 * len(source) + 2
    assert END not in output[:-1]
    assert len(Seq2SeqModel.create(TINY).predict(source, max_length=2)) <= 2
    aligned = to_pair(seq_example("add-easy", "123+45"))
    assert len(Seq2SeqModel.create(TINY_ALIGNED).predict(aligned.source)) == len(aligned.source)


def test_training_reduces_loss():
    model = Seq2SeqModel.create(TINY_ALIGNED.updated(seed=3))
    pairs = [to_pair(seq_example("add-easy", instance)) for instance in ("12+34", "5+6", "70+41")]
    before, _ = s2s_loss_and_grads(model, pairs)
    s2s_train(model, pairs, TrainConfig(learning_rate=0.01, max_steps=200), show_progress=False)
    after, _ = s2s_loss_and_grads(model, pairs)
    assert after < before


def test_train_save_and_load(tmp_path):
    model = Seq2SeqModel.create(TINY)
    pairs = [to_pair(seq_example("sort", instance)) for instance in ("3,1,2", "5,5,0,1")]
    result = s2s_train(model, pairs, TrainConfig(max_steps=4, log_interval=2), out_dir=tmp_path,
                       show_progress=False)
    assert result.steps == 4
    assert [row["step"] for row in read_rows(tmp_path / "metrics.csv")] == ["2", "4"]
    loaded = load_seq2seq(tmp_path / "model.ckpt")
    assert loaded.config == TINY
    for name, value in model.params.items():
        assert np.array_equal(loaded.params[name], value)
    assert s2s_eval(loaded, pairs) == s2s_eval(model, pairs)
    assert 0.0 <= s2s_eval(loaded, pairs) <= 1.0
    assert s2s_eval(loaded, []) == 0.0


def test_train_needs_examples():
    with pytest.raises(ConfigurationError):
        s2s_train(Seq2SeqModel.create(TINY), [], show_progress=False)


def test_checkpoint_kinds_do_not_mix(tmp_path, toy_model):
    npi_path = tmp_path / "npi.ckpt"
    save_checkpoint(toy_model, npi_path)
    with pytest.raises(CheckpointError, match="seq2seq"):
        load_seq2seq(npi_path)
    s2s_path = tmp_path / "s2s.ckpt"
    s2s_train(Seq2SeqModel.create(TINY), [to_pair(seq_example("sort", "2,1"))], TrainConfig(max_steps=1),
              out_dir=tmp_path, show_progress=False)
    (tmp_path / "model.ckpt").rename(s2s_path)
    with pytest.raises(CheckpointError):
        load_checkpoint(s2s_path)
