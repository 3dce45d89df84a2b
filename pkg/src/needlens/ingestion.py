"""Ingestion of the demographic registry and the free-text feedback stream.

Produces a harmonized corpus where every document is cleaned, tokenized,
linked to a demographic record and stamped with a follow-up wave.
"""

from __future__ import annotations

import csv
import io
import json
import re
import unicodedata
from dataclasses import dataclass, field

from .waves import parse_wire_wave

AGE_BANDS = ("B18_29", "B30_39", "B40_49", "B50_PLUS")
GENDERS = ("female", "male", "other_or_unknown")
IMD_BANDS = ("low", "high", "unknown")

_URL_RE = re.compile(r"(?:[a-zA-Z][a-zA-Z0-9+.-]*://|www\.)\S+")
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_SENTENCE_END_RE = re.compile(r"[.!?]+")

# pictographic / emoji codepoint ranges stripped during cleaning
_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),
    (0x2600, 0x27BF),
    (0x2B00, 0x2BFF),
    (0xFE00, 0xFE0F),
    (0x1F1E6, 0x1F1FF),
    (0x200D, 0x200D),
)


class IngestionError(Exception):
    """Raised when an ingest run cannot produce a usable result."""


@dataclass(frozen=True)
class DemographicRecord:
    user_id: str
    age_years: int
    age_band: str
    gender: str
    imd_decile: int | None
    imd_band: str


@dataclass
class FeedbackDocument:
    doc_id: str
    user_id: str
    wave: str
    raw_text: str
    clean_text: str
    tokens: list[str]
    sentences: list[tuple[int, int]]
    empty: bool = False


@dataclass
class IngestReport:
    rows_in: int = 0
    rows_kept: int = 0
    rows_removed: int = 0
    removed_missing_user_id: int = 0
    removed_missing_age: int = 0
    removed_bad_age: int = 0
    removed_duplicate_user_id: int = 0
    removed_unknown_user: int = 0
    removed_bad_wave: int = 0
    imputed_gender: int = 0
    imputed_imd: int = 0
    empty_after_cleaning: int = 0
    row_errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class Registry:
    """Anonymized demographic records plus the in-memory id mapping.

    The original-to-anonymized user id mapping lives only on this object
    for the duration of one ingest; it is never serialized.
    """

    def __init__(self, records: list[DemographicRecord], id_map: dict[str, str]):
        self.records = records
        self.by_id = {r.user_id: r for r in records}
        self._id_map = id_map

    def resolve(self, original_user_id: str) -> str | None:
        return self._id_map.get(original_user_id)

    def lookup(self, user_id: str) -> DemographicRecord:
        return self.by_id[user_id]


@dataclass
class Corpus:
    documents: list[FeedbackDocument]
    vocabulary: list[str]
    doc_term: dict[str, list[int]]  # doc_id -> token id sequence, non-empty docs only

    @property
    def vocab_index(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.vocabulary)}

    def nonempty_doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.documents if not d.empty]


def load_stopwords(path=None) -> frozenset[str]:
    """Load a stopword list (one token per line, '#' comments), defaulting
    to the pinned list shipped with the package."""
    if path is None:
        from importlib import resources

        text = resources.files("needlens.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


def band_age(age_years: int) -> str:
    """Age band for an in-range age; raises IngestionError otherwise."""
    if not 18 <= age_years <= 120:
        raise IngestionError(f"age {age_years} outside the accepted range 18..120")
    if age_years <= 29:
        return "B18_29"
    if age_years <= 39:
        return "B30_39"
    if age_years <= 49:
        return "B40_49"
    return "B50_PLUS"


def band_imd(imd_decile: int | None) -> str:
    if imd_decile is None:
        return "unknown"
    if not 1 <= imd_decile <= 10:
        raise IngestionError(f"imd_decile {imd_decile} outside 1..10")
    return "low" if imd_decile <= 5 else "high"


def _strip_emoji(text: str) -> str:
    out = []
    for ch in text:
        cp = ord(ch)
        if any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES):
            continue
        if unicodedata.category(ch) == "So":
            continue
        out.append(ch)
    return "".join(out)


def clean_and_tokenize(
    raw_text: str,
    stopwords: frozenset[str] | set[str],
    boilerplate: tuple[str, ...] = (),
) -> tuple[str, list[str], list[tuple[int, int]]]:
    """Fixed-order cleaning pipeline: URLs, emoji, boilerplate, lowercase,
    sentence segmentation, tokenization, stopword and short-token removal."""
    text = _URL_RE.sub(" ", raw_text)
    text = _strip_emoji(text)
    for phrase in boilerplate:
        if phrase:
            text = re.sub(re.escape(phrase), " ", text, flags=re.IGNORECASE)
    clean = re.sub(r"\s+", " ", text).strip().lower()

    sentences: list[tuple[int, int]] = []
    start = 0
    for m in _SENTENCE_END_RE.finditer(clean):
        end = m.end()
        if clean[start:end].strip():
            sentences.append((start, end))
        start = end
    if clean[start:].strip():
        sentences.append((start, len(clean)))

    tokens = [
        t
        for t in _TOKEN_RE.findall(clean)
        if len(t) >= 2 and t not in stopwords
    ]
    return clean, tokens, sentences


def ingest_registry(csv_bytes: bytes) -> tuple[Registry, IngestReport]:
    """Parse the registry CSV, impute/remove per the missing-data policy,
    anonymize and re-index user ids."""
    report = IngestReport()
    try:
        text = csv_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestionError(f"registry is not valid UTF-8: {exc}") from exc

    reader = csv.DictReader(io.StringIO(text))
    required = {"user_id", "age", "gender", "imd_decile"}
    if reader.fieldnames is None or not required.issubset(set(reader.fieldnames)):
        raise IngestionError(
            f"registry header must contain {sorted(required)}, got {reader.fieldnames}"
        )

    records: list[DemographicRecord] = []
    id_map: dict[str, str] = {}
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        report.rows_in += 1
        original_id = (row.get("user_id") or "").strip()
        if not original_id:
            report.rows_removed += 1
            report.removed_missing_user_id += 1
            continue
        if original_id in seen:
            report.rows_removed += 1
            report.removed_duplicate_user_id += 1
            report.row_errors.append(f"line {lineno}: duplicate user_id {original_id!r}")
            continue
        seen.add(original_id)

        age_raw = (row.get("age") or "").strip()
        if not age_raw:
            report.rows_removed += 1
            report.removed_missing_age += 1
            continue
        try:
            age = int(age_raw)
            age_band = band_age(age)
        except (ValueError, IngestionError):
            report.rows_removed += 1
            report.removed_bad_age += 1
            report.row_errors.append(f"line {lineno}: unparseable or out-of-range age {age_raw!r}")
            continue

        gender = (row.get("gender") or "").strip().lower()
        if gender == "":
            report.imputed_gender += 1
            gender = "other_or_unknown"
        elif gender not in ("female", "male", "other_or_unknown"):
            gender = "other_or_unknown"

        imd_raw = (row.get("imd_decile") or "").strip()
        imd_decile: int | None
        if not imd_raw:
            imd_decile = None
            report.imputed_imd += 1
        else:
            try:
                imd_decile = int(imd_raw)
                if not 1 <= imd_decile <= 10:
                    raise ValueError
            except ValueError:
                imd_decile = None
                report.imputed_imd += 1
                report.row_errors.append(f"line {lineno}: bad imd_decile {imd_raw!r}")

        anon_id = f"u{len(records) + 1:05d}"
        id_map[original_id] = anon_id
        records.append(
            DemographicRecord(
                user_id=anon_id,
                age_years=age,
                age_band=age_band,
                gender=gender,
                imd_decile=imd_decile,
                imd_band=band_imd(imd_decile),
            )
        )
        report.rows_kept += 1

    if not records:
        raise IngestionError("zero usable records in registry")
    return Registry(records, id_map), report


def build_vocabulary(
    token_lists: list[list[str]],
    min_df: int = 2,
    max_df_frac: float = 0.5,
) -> list[str]:
    """Document-frequency filtered vocabulary in first-seen order."""
    df: dict[str, int] = {}
    order: list[str] = []
    for tokens in token_lists:
        for tok in set(tokens):
            if tok not in df:
                order.append(tok)
            df[tok] = df.get(tok, 0) + 1
    n_docs = len(token_lists)
    limit = max_df_frac * n_docs
    return [t for t in order if df[t] >= min_df and df[t] <= limit]


def link_and_stamp(
    docs_bytes: bytes,
    registry: Registry,
    stopwords: frozenset[str] | set[str],
    boilerplate: tuple[str, ...] = (),
    min_df: int = 2,
    max_df_frac: float = 0.5,
) -> tuple[Corpus, IngestReport]:
    """Clean, link and wave-stamp the feedback stream into a Corpus."""
    report = IngestReport()
    docs: list[FeedbackDocument] = []
    auto_id = 0
    lines = docs_bytes.decode("utf-8").splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        report.rows_in += 1
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            report.rows_removed += 1
            report.row_errors.append(f"line {lineno}: malformed JSON")
            continue
        user = registry.resolve(str(obj.get("user_id", "")))
        if user is None:
            report.rows_removed += 1
            report.removed_unknown_user += 1
            continue
        try:
            wave = parse_wire_wave(str(obj.get("wave", "")))
        except ValueError:
            report.rows_removed += 1
            report.removed_bad_wave += 1
            report.row_errors.append(f"line {lineno}: unknown wave {obj.get('wave')!r}")
            continue
        raw = str(obj.get("text", ""))
        doc_id = str(obj.get("doc_id") or "")
        if not doc_id:
            auto_id += 1
            doc_id = f"d{auto_id:06d}"
        clean, tokens, sentences = clean_and_tokenize(raw, stopwords, boilerplate)
        docs.append(
            FeedbackDocument(
                doc_id=doc_id,
                user_id=user,
                wave=wave,
                raw_text=raw,
                clean_text=clean,
                tokens=tokens,
                sentences=sentences,
            )
        )
        report.rows_kept += 1

    if report.rows_in and report.rows_removed > report.rows_in * 0.5:
        raise IngestionError(
            f"{report.rows_removed} of {report.rows_in} feedback rows dropped; "
            "streams appear mismatched"
        )
    if not docs:
        raise IngestionError("zero usable feedback documents")

    vocabulary = build_vocabulary([d.tokens for d in docs], min_df, max_df_frac)
    index = {tok: i for i, tok in enumerate(vocabulary)}
    doc_term: dict[str, list[int]] = {}
    for d in docs:
        ids = [index[t] for t in d.tokens if t in index]
        if ids:
            doc_term[d.doc_id] = ids
        else:
            d.empty = True
            report.empty_after_cleaning += 1
    return Corpus(documents=docs, vocabulary=vocabulary, doc_term=doc_term), report


def corpus_to_dict(corpus: Corpus) -> dict:
    return {
        "version": "corpus/1",
        "vocabulary": corpus.vocabulary,
        "documents": [
            {
                "doc_id": d.doc_id,
                "user_id": d.user_id,
                "wave": d.wave,
                "clean_text": d.clean_text,
                "tokens": d.tokens,
                "sentences": [list(s) for s in d.sentences],
                "empty": d.empty,
            }
            for d in corpus.documents
        ],
        "doc_term": corpus.doc_term,
    }


def corpus_from_dict(obj: dict) -> Corpus:
    docs = [
        FeedbackDocument(
            doc_id=d["doc_id"],
            user_id=d["user_id"],
            wave=d["wave"],
            raw_text="",
            clean_text=d.get("clean_text", ""),
            tokens=list(d["tokens"]),
            sentences=[tuple(s) for s in d.get("sentences", [])],
            empty=bool(d.get("empty", False)),
        )
        for d in obj["documents"]
    ]
    return Corpus(
        documents=docs,
        vocabulary=list(obj["vocabulary"]),
        doc_term={k: list(v) for k, v in obj["doc_term"].items()},
    )


def registry_to_dict(registry: Registry) -> dict:
    return {
        "version": "reg/1",
        "records": [
            {
                "user_id": r.user_id,
                "age_years": r.age_years,
                "age_band": r.age_band,
                "gender": r.gender,
                "imd_decile": r.imd_decile,
                "imd_band": r.imd_band,
            }
            for r in registry.records
        ],
    }


def registry_from_dict(obj: dict) -> Registry:
    records = [
        DemographicRecord(
            user_id=r["user_id"],
            age_years=r["age_years"],
            age_band=r["age_band"],
            gender=r["gender"],
            imd_decile=r["imd_decile"],
            imd_band=r["imd_band"],
        )
        for r in obj["records"]
    ]
    return Registry(records, {})
