from __future__ import annotations

from dataclasses import dataclass
from typing import Final, Sequence

from npi_workbench.errors import InputError
from npi_workbench.oracles.traceio import SeqExample

"""Flat string encodings of sorting and addition for the sequence baselines.

Text forms (what goes into a trace file's seq records):

    sort         input "925"              target "259"
    add-plain    input "90X160X"          target "250"        full line "90X160X250"
    add-stacked  input "090XXXX|061XXXX"  target "XXXX250"
    add-easy     input "090|061"          target "052"

Stacked channels are the reversed operands zero-padded to L digits (L the
longer operand) followed by L+1 X; the target is L X then the sum, most
significant digit first, left-padded with X to L+1 characters. Easy channels
are reversed operands zero-padded to the length of the sum, and the target is
the reversed sum, one digit per input position.
"""

DIGITS: Final = "0123456789"
SEPARATOR: Final = "X"
END: Final = 11
GO: Final = 12
VOCAB_SIZE: Final = 13
TOKEN_NAMES: Final = tuple(DIGITS) + (SEPARATOR, "END", "GO")
CHANNEL_JOIN: Final = "|"

SEQ_TASKS: Final = ("sort", "add-plain", "add-stacked", "add-easy")
# Stacked and easy emit one output token per input position.
ALIGNED_TASKS: Final = ("add-stacked", "add-easy")


@dataclass(frozen=True)
class SeqPair:
    """Model-level example: per-position input tokens (one per channel) and output tokens."""
    source: tuple[tuple[int, ...], ...]
    target: tuple[int, ...]

    @property
    def channels(self) -> int:
        return len(self.source[0]) if self.source else 1


def tokenize(text: str) -> tuple[int, ...]:
    try:
        return tuple(TOKEN_NAMES.index(ch) for ch in text)
    except ValueError:
        raise InputError(f"{text!r} contains characters outside 0-9 and X") from None


def detokenize(tokens: Sequence[int]) -> str:
    return "".join(TOKEN_NAMES[t] for t in tokens if t < END)


def _number(value: int | str) -> str:
    text = str(value)
    if not text.isdigit():
        raise InputError(f"operands must be non-negative integers, got {value!r}")
    return str(int(text))


def format_sort_seq(array: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(input tokens, target tokens), both END-terminated."""
    if not array:
        raise InputError("cannot format an empty array")
    if any(not 0 <= v <= 9 for v in array):
        raise InputError(f"array entries must be digits: {list(array)}")
    return tuple(array) + (END,), tuple(sorted(array)) + (END,)


def format_add_plain(a: int | str, b: int | str) -> str:
    a, b = _number(a), _number(b)
    return f"{a}{SEPARATOR}{b}{SEPARATOR}{int(a) + int(b)}"


def parse_add_plain(text: str) -> tuple[int, int, int]:
    parts = text.split(SEPARATOR)
    if len(parts) != 3 or not all(part.isdigit() for part in parts):
        raise InputError(f"plain addition must look like '90X160X250', got {text!r}")
    a, b, total = parts
    return int(a), int(b), int(total)


def format_add_stacked(a: int | str, b: int | str) -> tuple[str, str, str]:
    a, b = _number(a), _number(b)
    length = max(len(a), len(b))
    pad = SEPARATOR * (length + 1)
    channel1 = a[::-1].ljust(length, "0") + pad
    channel2 = b[::-1].ljust(length, "0") + pad
    output = SEPARATOR * length + str(int(a) + int(b)).rjust(length + 1, SEPARATOR)
    return channel1, channel2, output


def parse_add_stacked(channel1: str, channel2: str, output: str) -> tuple[int, int, int]:
    try:
        a = int(channel1.rstrip(SEPARATOR)[::-1])
        b = int(channel2.rstrip(SEPARATOR)[::-1])
        total = int(output.lstrip(SEPARATOR))
    except ValueError:
        raise InputError(f"not a stacked addition: {channel1!r} {channel2!r} {output!r}") from None
    return a, b, total


def format_add_easy(a: int | str, b: int | str) -> tuple[str, str, str]:
    a, b = _number(a), _number(b)
    total = str(int(a) + int(b))
    length = max(len(a), len(b), len(total))
    return a[::-1].ljust(length, "0"), b[::-1].ljust(length, "0"), total[::-1].ljust(length, "0")


def parse_add_easy(channel1: str, channel2: str, output: str) -> tuple[int, int, int]:
    try:
        return int(channel1[::-1]), int(channel2[::-1]), int(output[::-1])
    except ValueError:
        raise InputError(f"not an easy addition: {channel1!r} {channel2!r} {output!r}") from None


def seq_example(task: str, instance: str) -> SeqExample:
    """Text example for a sort instance ('9,2,5') or an addition instance ('90+160')."""
    if task == "sort":
        source, target = format_sort_seq([int(v) for v in instance.split(",")])
        return SeqExample(task, detokenize(source), detokenize(target))
    a, _, b = instance.partition("+")
    if task == "add-plain":
        line = format_add_plain(a, b)
        cut = line.rindex(SEPARATOR) + 1
        return SeqExample(task, line[:cut], line[cut:])
    if task == "add-stacked":
        channel1, channel2, output = format_add_stacked(a, b)
    elif task == "add-easy":
        channel1, channel2, output = format_add_easy(a, b)
    else:
        raise InputError(f"unknown seq task {task!r}; choose from {', '.join(SEQ_TASKS)}")
    return SeqExample(task, channel1 + CHANNEL_JOIN + channel2, output)


def to_pair(example: SeqExample) -> SeqPair:
    """Model tokens for a text example. Encoder-decoder targets get an END token."""
    channels = example.source.split(CHANNEL_JOIN)
    columns = tuple(zip(*(tokenize(channel) for channel in channels)))
    target = tokenize(example.target)
    if example.task in ALIGNED_TASKS:
        if len(columns) != len(target):
            raise InputError(f"aligned example needs one output per input position: {example}")
        return SeqPair(columns, target)
    return SeqPair(columns + ((END,),), target + (END,))
