"""EEG file ingestion: EDF and plain-matrix parsing, manifests, corpora.

Only continuous EDF is supported (no EDF+D); "EDF Annotations" signals are
silently dropped.  All remaining signals must share one sampling rate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channels import ChannelSet, normalize_label, resolve_policy
from .errors import (
    EegIdError,
    MalformedHeader,
    MissingChannel,
    MixedSamplingRates,
    NonNumericCell,
    RaggedRows,
    TruncatedRecord,
    WindowOutOfRange,
)

CONDITIONS = ("resting", "task")


@dataclass(frozen=True)
class EegRecording:
    """A channels-by-samples block of EEG with its provenance.

    Rows of `data` follow `channel_names`.  Units are conventionally
    microvolts but not enforced.
    """

    channel_names: tuple
    sampling_rate_hz: float
    data: np.ndarray
    subject_id: str = ""
    dataset_id: str = ""
    condition: str = "resting"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[1] < 1:
            raise ValueError("data must be a 2-D N_ch x N_samples matrix")
        names = tuple(self.channel_names)
        if len(names) != data.shape[0]:
            raise ValueError("channel_names length must match data rows")
        if len(set(names)) != len(names):
            raise ValueError("duplicate channel names")
        if not self.sampling_rate_hz > 0:
            raise ValueError("sampling_rate_hz must be positive")
        if self.condition not in CONDITIONS:
            raise ValueError(f"condition must be one of {CONDITIONS}")
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "data", data)

    @property
    def n_channels(self):
        return self.data.shape[0]

    @property
    def n_samples(self):
        return self.data.shape[1]

    @property
    def duration_s(self):
        return self.n_samples / self.sampling_rate_hz

    @property
    def label(self):
        """Class label used for identification: dataset-qualified subject."""
        return f"{self.dataset_id}/{self.subject_id}"


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    format: str  # "edf" | "matrix"
    subject_id: str
    dataset_id: str
    condition: str
    window_s: tuple  # (start, end) in seconds
    sampling_rate_hz: float = 0.0  # matrix entries only
    channel_names: tuple = ()      # matrix entries only


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple
    target_rate_hz: float
    channel_policy: object  # "common_56" | "ten_twenty_21" | explicit list

    def __post_init__(self):
        if not self.target_rate_hz > 0:
            raise ValueError("target_rate_hz must be positive")
        seen = set()
        for e in self.entries:
            start, end = e.window_s
            if start < 0 or not start < end:
                raise ValueError(f"bad segment window {e.window_s} for {e.path}")
            key = (e.dataset_id, e.subject_id, e.condition)
            if key in seen:
                raise ValueError(f"duplicate manifest entry for {key}")
            seen.add(key)

    @property
    def channel_set(self) -> ChannelSet:
        return resolve_policy(self.channel_policy)


def load_manifest(path) -> DatasetManifest:
    """Read a JSON manifest file (schema documented in the README)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    base = Path(path).parent
    entries = []
    for raw in doc["entries"]:
        p = Path(raw["path"])
        if not p.is_absolute():
            p = base / p
        entries.append(ManifestEntry(
            path=str(p),
            format=raw["format"],
            subject_id=str(raw["subject_id"]),
            dataset_id=str(raw["dataset_id"]),
            condition=raw.get("condition", "resting"),
            window_s=tuple(raw["window_s"]),
            sampling_rate_hz=float(raw.get("sampling_rate_hz", 0.0)),
            channel_names=tuple(raw.get("channel_names", ())),
        ))
    return DatasetManifest(
        entries=tuple(entries),
        target_rate_hz=float(doc["target_rate_hz"]),
        channel_policy=doc.get("channel_policy", "common_56"),
    )


# --- EDF parsing -----------------------------------------------------------

_EDF_HEADER_LEN = 256
_EDF_SIGNAL_HEADER_LEN = 256
_ANNOTATION_LABEL = "EDF ANNOTATIONS"


def _ascii_field(buf: bytes, start: int, length: int) -> str:
    raw = buf[start:start + length]
    try:
        return raw.decode("ascii").strip()
    except UnicodeDecodeError as exc:
        raise MalformedHeader(f"non-ASCII bytes in header field at offset {start}") from exc


def _numeric_field(buf: bytes, start: int, length: int, what: str) -> float:
    text = _ascii_field(buf, start, length)
    try:
        return float(text)
    except ValueError as exc:
        raise MalformedHeader(f"non-numeric {what} field: {text!r}") from exc


def parse_edf(raw: bytes, subject_id="", dataset_id="", condition="resting") -> EegRecording:
    """Decode a continuous EDF byte stream into an EegRecording.

    Samples are 16-bit little-endian two's complement, mapped to physical
    units with the per-signal digital/physical min/max linear calibration.
    Annotation signals are dropped.  Raises MalformedHeader,
    MixedSamplingRates or TruncatedRecord on bad input.
    """
    if len(raw) < _EDF_HEADER_LEN:
        raise MalformedHeader("input shorter than the 256-byte EDF header")
    version = _ascii_field(raw, 0, 8)
    if version != "0":
        raise MalformedHeader(f"unsupported EDF version field {version!r}")
    header_bytes = int(_numeric_field(raw, 184, 8, "header length"))
    n_records = int(_numeric_field(raw, 236, 8, "record count"))
    record_duration = _numeric_field(raw, 244, 8, "record duration")
    n_signals = int(_numeric_field(raw, 252, 4, "signal count"))
    if n_signals < 1:
        raise MalformedHeader("EDF declares no signals")
    expected_header = _EDF_HEADER_LEN + n_signals * _EDF_SIGNAL_HEADER_LEN
    if header_bytes != expected_header:
        raise MalformedHeader(
            f"header length field {header_bytes} != 256 + 256 x {n_signals} signals"
        )
    if len(raw) < expected_header:
        raise MalformedHeader("input truncated inside the signal headers")
    if record_duration <= 0:
        raise MalformedHeader(f"non-positive data record duration {record_duration}")

    sig = raw[_EDF_HEADER_LEN:expected_header]

    def sig_numeric(width, offset, what):
        # offset is the byte offset of the field block within the
        # transposed signal-header area
        out = []
        for i in range(n_signals):
            start = offset + i * width
            text = sig[start:start + width].decode("ascii", errors="replace").strip()
            try:
                out.append(float(text))
            except ValueError:
                raise MalformedHeader(f"non-numeric {what} for a signal: {text!r}") from None
        return out

    # signal header layout: label(16) transducer(80) dim(8) phys_min(8)
    # phys_max(8) dig_min(8) dig_max(8) prefilter(80) samples_per_record(8)
    off = 0
    labels = []
    for i in range(n_signals):
        labels.append(sig[off + i * 16: off + (i + 1) * 16].decode("ascii", errors="replace").strip())
    off += 16 * n_signals + 80 * n_signals + 8 * n_signals
    phys_min = sig_numeric(8, off, "physical minimum"); off += 8 * n_signals
    phys_max = sig_numeric(8, off, "physical maximum"); off += 8 * n_signals
    dig_min = sig_numeric(8, off, "digital minimum"); off += 8 * n_signals
    dig_max = sig_numeric(8, off, "digital maximum"); off += 8 * n_signals
    off += 80 * n_signals
    samples_per_record = [int(v) for v in sig_numeric(8, off, "samples per record")]

    keep = [i for i, lab in enumerate(labels)
            if normalize_label(lab) != _ANNOTATION_LABEL]
    if not keep:
        raise MalformedHeader("EDF contains only annotation signals")
    for i in keep:
        if samples_per_record[i] < 1:
            raise MalformedHeader(f"signal {labels[i]!r} declares no samples per record")
        if dig_max[i] <= dig_min[i]:
            raise MalformedHeader(f"signal {labels[i]!r} has a degenerate digital range")

    rates = {samples_per_record[i] / record_duration for i in keep}
    if len(rates) > 1:
        raise MixedSamplingRates(f"signals declare multiple sampling rates: {sorted(rates)}")
    rate = rates.pop()

    record_samples = sum(samples_per_record)
    record_bytes = 2 * record_samples
    body = raw[expected_header:]
    if n_records < 0:
        # unknown record count: infer from the payload size
        n_records = len(body) // record_bytes
    if len(body) < n_records * record_bytes:
        raise TruncatedRecord(
            f"expected {n_records} records of {record_bytes} bytes, got {len(body)} bytes"
        )

    flat = np.frombuffer(body[:n_records * record_bytes], dtype="<i2")
    flat = flat.reshape(n_records, record_samples)
    starts = np.cumsum([0] + samples_per_record)
    channels, names = [], []
    for i in keep:
        digital = flat[:, starts[i]:starts[i + 1]].reshape(-1).astype(float)
        gain = (phys_max[i] - phys_min[i]) / (dig_max[i] - dig_min[i])
        channels.append((digital - dig_min[i]) * gain + phys_min[i])
        names.append(normalize_label(labels[i]))
    if len(set(names)) != len(names):
        raise MalformedHeader("duplicate channel labels after normalization")

    return EegRecording(
        channel_names=tuple(names),
        sampling_rate_hz=rate,
        data=np.vstack(channels),
        subject_id=subject_id,
        dataset_id=dataset_id,
        condition=condition,
    )


# --- plain matrix format ---------------------------------------------------

def load_matrix(stream, sampling_rate_hz, channel_names,
                subject_id="", dataset_id="", condition="resting") -> EegRecording:
    """Read a delimiter-separated numeric matrix, one channel per line.

    `stream` is an iterable of text lines (an open file works).  Commas and
    whitespace both act as delimiters.
    """
    rows = []
    width = None
    for lineno, line in enumerate(stream, start=1):
        parts = line.replace(",", " ").split()
        if not parts:
            continue
        values = []
        for cell in parts:
            try:
                values.append(float(cell))
            except ValueError:
                raise NonNumericCell(f"line {lineno}: cannot parse {cell!r}") from None
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise RaggedRows(f"line {lineno} has {len(values)} cells, expected {width}")
        rows.append(values)
    if not rows:
        raise RaggedRows("matrix stream contains no data rows")
    names = tuple(normalize_label(n) for n in channel_names)
    if len(names) != len(rows):
        raise RaggedRows(f"{len(names)} channel names for {len(rows)} data rows")
    return EegRecording(
        channel_names=names,
        sampling_rate_hz=sampling_rate_hz,
        data=np.array(rows, dtype=float),
        subject_id=subject_id,
        dataset_id=dataset_id,
        condition=condition,
    )


def save_matrix(rec: EegRecording, fh):
    """Write a recording in the plain matrix format (inverse of load_matrix)."""
    for row in rec.data:
        fh.write(" ".join(repr(float(v)) for v in row))
        fh.write("\n")


# --- channel selection and corpus assembly ---------------------------------

def select_channels(rec: EegRecording, channel_set: ChannelSet) -> EegRecording:
    """Reorder/restrict a recording to a channel set's canonical order."""
    index = {name: i for i, name in enumerate(rec.channel_names)}
    rows = []
    for name in channel_set:
        if name not in index:
            raise MissingChannel(name)
        rows.append(index[name])
    return replace(rec, channel_names=tuple(channel_set), data=rec.data[rows])


def window_recording(rec: EegRecording, start_s, end_s) -> EegRecording:
    """Cut [start_s, end_s) out of a recording."""
    i0 = int(round(start_s * rec.sampling_rate_hz))
    i1 = int(round(end_s * rec.sampling_rate_hz))
    if i0 < 0 or i1 > rec.n_samples or i0 >= i1:
        raise WindowOutOfRange(
            f"window [{start_s}, {end_s}] s outside recording of {rec.duration_s:.3f} s"
        )
    return replace(rec, data=rec.data[:, i0:i1])


def _load_entry(entry: ManifestEntry) -> EegRecording:
    if entry.format == "edf":
        raw = Path(entry.path).read_bytes()
        try:
            return parse_edf(raw, subject_id=entry.subject_id,
                             dataset_id=entry.dataset_id, condition=entry.condition)
        except EegIdError as exc:
            raise type(exc)(f"{entry.path}: {exc}") from None
    if entry.format == "matrix":
        if not entry.sampling_rate_hz > 0 or not entry.channel_names:
            raise ValueError(
                f"matrix entry {entry.path} needs sampling_rate_hz and channel_names"
            )
        with open(entry.path, "r", encoding="utf-8") as fh:
            return load_matrix(fh, entry.sampling_rate_hz, entry.channel_names,
                               subject_id=entry.subject_id,
                               dataset_id=entry.dataset_id,
                               condition=entry.condition)
    raise ValueError(f"unknown entry format {entry.format!r}")


def build_corpus(manifest: DatasetManifest) -> list:
    """Load, window, channel-select and resample every manifest entry.

    Each dataset's recordings are resampled independently to the manifest
    target rate, mirroring the pooling protocol for heterogeneous sources.
    """
    from . import dsp  # local import: dsp depends on types above

    channel_set = manifest.channel_set
    corpus = []
    for entry in manifest.entries:
        rec = _load_entry(entry)
        rec = window_recording(rec, *entry.window_s)
        rec = select_channels(rec, channel_set)
        rec = dsp.resample(rec, manifest.target_rate_hz)
        corpus.append(rec)
    return corpus
