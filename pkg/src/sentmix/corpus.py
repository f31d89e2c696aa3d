"""Corpus ingestion: sentence splitting, length binning, histogram I/O and summaries.

A corpus is reduced to a histogram of sentence lengths (words per sentence)
over contiguous length bins.  All downstream fitting and model comparison
consumes :class:`LengthHistogram` values produced here.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

__all__ = [
    "LengthHistogram",
    "SummaryStats",
    "HistogramFormatError",
    "DEFAULT_ABBREVIATIONS",
    "split_sentences",
    "bin_lengths",
    "load_histogram",
    "save_histogram",
    "summary_stats",
    "bundled_corpus",
]

SENTENCE_TERMINATORS = (".", "!", "?", "…")

#: Token cores (terminal '.' stripped, lowercased) that do not end a sentence.
DEFAULT_ABBREVIATIONS = frozenset({
    "mr", "mrs", "ms", "dr", "prof", "st", "vs", "etc", "e.g", "i.e",
    "т", "т.е", "т.д", "т.п", "и.т.д",
})


class HistogramFormatError(ValueError):
    """Raised when a histogram CSV is malformed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class LengthHistogram:
    """Binned sentence-length counts for one corpus.

    Bins are contiguous, non-overlapping integer ranges ``lo..hi`` (inclusive)
    with ``lo`` of each bin equal to the previous ``hi + 1`` and the first
    ``lo >= 1``.  ``total`` is always the exact sum of the counts.
    """

    label: str
    bins: tuple[tuple[int, int, int], ...]  # (lo, hi, count)

    def __post_init__(self):
        if not self.bins:
            raise ValueError("histogram needs at least one bin")
        prev_hi = None
        for lo, hi, count in self.bins:
            if lo < 1:
                raise ValueError(f"bin lower edge must be >= 1, got {lo}")
            if lo > hi:
                raise ValueError(f"bin has lo > hi: ({lo}, {hi})")
            if count < 0:
                raise ValueError(f"negative count {count} in bin ({lo}, {hi})")
            if prev_hi is not None and lo != prev_hi + 1:
                raise ValueError(
                    f"bins not contiguous: bin starting at {lo} follows bin ending at {prev_hi}"
                )
            prev_hi = hi

    @property
    def total(self) -> int:
        return sum(c for _, _, c in self.bins)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((lo, hi) for lo, hi, _ in self.bins)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(c for _, _, c in self.bins)

    def nonzero_bins(self) -> int:
        return sum(1 for _, _, c in self.bins if c > 0)

    def with_label(self, label: str) -> "LengthHistogram":
        return LengthHistogram(label, self.bins)

    def add_counts(self, other: "LengthHistogram", label: str | None = None) -> "LengthHistogram":
        """Bin-wise sum of two histograms over identical bins."""
        if self.edges != other.edges:
            raise ValueError("cannot add histograms with different bins")
        merged = tuple(
            (lo, hi, c1 + c2)
            for (lo, hi, c1), (_, _, c2) in zip(self.bins, other.bins)
        )
        return LengthHistogram(label or f"{self.label}+{other.label}", merged)


@dataclass(frozen=True)
class SummaryStats:
    """Grouped-data moments of a length histogram.

    Computed from bin midpoints ``(lo + hi) / 2`` weighted by counts; a
    surrogate for raw-length moments when only binned counts are available.
    """

    mean_length: float
    variance: float
    dispersion_ratio: float


def _ends_sentence(token: str, abbreviations: frozenset[str]) -> bool:
    last = token[-1]
    if last not in SENTENCE_TERMINATORS:
        return False
    if last == ".":
        core = token[:-1].lower().lstrip("\"'«„(“")
        if core in abbreviations:
            return False
    return True


def split_sentences(text: str, abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS) -> list[int]:
    """Split text into sentences and return the word count of each.

    A word is a maximal whitespace-delimited token.  A sentence ends at a
    token whose final character is '.', '!', '?' or '…' (followed by
    whitespace or end of text), unless the token is a listed abbreviation
    ending in '.'.  Trailing tokens after the last terminator are not counted
    as a sentence.  Empty input, or input with no terminator, gives ``[]``.
    """
    abbrev = frozenset(a.lower() for a in abbreviations)
    lengths: list[int] = []
    words = 0
    for token in text.split():
        words += 1
        if _ends_sentence(token, abbrev):
            lengths.append(words)
            words = 0
    return lengths


def bin_lengths(
    lengths: Sequence[int],
    bin_width: int = 5,
    max_length: int = 65,
    *,
    label: str = "corpus",
    overflow: str = "drop",
) -> tuple[LengthHistogram, int]:
    """Bin sentence lengths into ``[1, w], [w+1, 2w], ...`` up to ``max_length``.

    Lengths above ``max_length`` are handled per ``overflow``: ``"drop"``
    (default) excludes them and reports how many were dropped; ``"fold"``
    counts them in the last bin.  Returns ``(histogram, n_dropped)``.
    """
    if bin_width < 1:
        raise ValueError("bin_width must be >= 1")
    if max_length < bin_width or max_length % bin_width != 0:
        raise ValueError("max_length must be a positive multiple of bin_width")
    if overflow not in ("drop", "fold"):
        raise ValueError(f"unknown overflow policy {overflow!r}")
    if len(lengths) == 0:
        raise ValueError("empty corpus")

    n_bins = max_length // bin_width
    counts = [0] * n_bins
    dropped = 0
    for y in lengths:
        if y < 1:
            raise ValueError(f"sentence length must be >= 1, got {y}")
        if y > max_length:
            if overflow == "fold":
                counts[-1] += 1
            else:
                dropped += 1
            continue
        counts[(y - 1) // bin_width] += 1

    bins = tuple(
        (i * bin_width + 1, (i + 1) * bin_width, counts[i]) for i in range(n_bins)
    )
    return LengthHistogram(label, bins), dropped


def _parse_histogram(stream: io.TextIOBase, label: str) -> LengthHistogram:
    rows: list[tuple[int, int, int]] = []
    header_seen = False
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("label:"):
                label = body.split(":", 1)[1].strip()
            continue
        if not header_seen:
            if line.lower() != "lo,hi,count":
                raise HistogramFormatError(
                    f"expected header 'lo,hi,count', got {line!r}", lineno
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise HistogramFormatError(f"expected 3 comma-separated fields, got {line!r}", lineno)
        try:
            lo, hi, count = (int(p.strip()) for p in parts)
        except ValueError:
            raise HistogramFormatError(f"non-integer field in {line!r}", lineno) from None
        try:
            rows.append((lo, hi, count))
            LengthHistogram(label, tuple(rows))
        except ValueError as exc:
            raise HistogramFormatError(str(exc), lineno) from None
    if not header_seen:
        raise HistogramFormatError("missing 'lo,hi,count' header")
    if not rows:
        raise HistogramFormatError("histogram has no bins")
    return LengthHistogram(label, tuple(rows))


def load_histogram(path: str | Path) -> LengthHistogram:
    """Read a histogram CSV (header ``lo,hi,count``; '#' lines are comments).

    The label comes from a ``# label: NAME`` comment when present, otherwise
    from the file stem.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        return _parse_histogram(fh, label=path.stem)


def save_histogram(hist: LengthHistogram, path: str | Path) -> None:
    """Write a histogram CSV (UTF-8, LF); ``load_histogram`` round-trips it."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# label: {hist.label}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lo", "hi", "count"])
        for lo, hi, count in hist.bins:
            writer.writerow([lo, hi, count])


def summary_stats(hist: LengthHistogram) -> SummaryStats:
    """Midpoint-weighted mean, variance and variance/mean dispersion ratio."""
    n = hist.total
    if n == 0:
        raise ValueError("empty histogram")
    mean = sum(0.5 * (lo + hi) * c for lo, hi, c in hist.bins) / n
    second = sum((0.5 * (lo + hi)) ** 2 * c for lo, hi, c in hist.bins) / n
    variance = second - mean * mean
    if variance < 0:  # tiny negative from roundoff on degenerate data
        variance = 0.0
    return SummaryStats(mean_length=mean, variance=variance, dispersion_ratio=variance / mean)


def bundled_corpus() -> dict[str, LengthHistogram]:
    """The packaged Quiet Don sentence-length dataset: labels Sh, Kr, TD."""
    out: dict[str, LengthHistogram] = {}
    for name in ("sh.csv", "kr.csv", "td.csv"):
        ref = resources.files("sentmix.data").joinpath(name)
        with ref.open("r", encoding="utf-8") as fh:
            hist = _parse_histogram(fh, label=Path(name).stem)
        out[hist.label] = hist
    return out
