import logging
import os
import re
import time
from pathlib import Path
from typing import Dict, List, Optional, Union

import requests

from shared.errors import InsufficientTerms, InvalidSequenceId, NetworkError, NotFound, ParseError
from shared.exact_arith import Natural
from shared.models import BFile, BFileEntry, ComparisonReport, DataSource, SequenceBinding, TermMismatch

logger = logging.getLogger(__name__)

# --- CONFIGURATION ---
# Read at call time so OEIS_BASE_URL / OEIS_FIXTURE_DIR overrides (including
# those loaded from a .env file by the CLI) apply to every fetch.
DEFAULT_BASE_URL = "https://oeis.org"
DEFAULT_FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "oeis"
MAX_ATTEMPTS = 2  # one retry on transient failure

SEQUENCE_ID_PATTERN = re.compile(r"A\d{6}")


def base_url() -> str:
    return os.getenv("OEIS_BASE_URL", DEFAULT_BASE_URL).rstrip("/")


def fixture_dir() -> Path:
    return Path(os.getenv("OEIS_FIXTURE_DIR", str(DEFAULT_FIXTURE_DIR)))


def _timeout_seconds() -> float:
    return float(os.getenv("OEIS_TIMEOUT_SECONDS", "10"))


def _backoff_seconds() -> float:
    return float(os.getenv("OEIS_BACKOFF_SECONDS", "1.0"))


# --- Sequence Bindings ---
# offset is the OEIS index holding our n = 1 term. A000332 is C(n,4) from
# index 0, so F(1,1,3) = C(4,4) = 1 sits at index 4.
SEQUENCE_BINDINGS: List[SequenceBinding] = [
    SequenceBinding(sequence_id="A000292", m=1, k=2, offset=1),
    SequenceBinding(sequence_id="A000332", m=1, k=3, offset=4),
    SequenceBinding(sequence_id="A000537", m=3, k=1, offset=1),
    # triangular numbers F(n,1,1); supplementary, not one of the cited instances
    SequenceBinding(sequence_id="A000217", m=1, k=1, offset=1, cited=False),
]


def binding_for(sequence_id: str) -> SequenceBinding:
    validate_sequence_id(sequence_id)
    for binding in SEQUENCE_BINDINGS:
        if binding.sequence_id == sequence_id:
            return binding
    raise NotFound(f"No F(n,m,k) binding is shipped for {sequence_id}")


def validate_sequence_id(sequence_id: str) -> str:
    if not SEQUENCE_ID_PATTERN.fullmatch(sequence_id or ""):
        raise InvalidSequenceId(f"Not an OEIS A-number: {sequence_id!r}")
    return sequence_id


def fixture_path(sequence_id: str, directory: Optional[Union[str, Path]] = None) -> Path:
    validate_sequence_id(sequence_id)
    return Path(directory or fixture_dir()) / f"b{sequence_id[1:]}.txt"


# --- b-file Codec ---

def parse_bfile(text: str, sequence_id: Optional[str] = None) -> BFile:
    """
    Parses a b-file body: one "<index> <value>" pair per line, '#' comments and
    blank lines skipped, LF or CRLF endings. Without an explicit sequence_id the
    first A-number found in a comment line is used.
    """
    entries: List[BFileEntry] = []
    header_id = None
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if header_id is None:
                found = re.search(r"A\d{6}", line)
                header_id = found.group(0) if found else None
            continue

        parts = line.split()
        try:
            if len(parts) != 2:
                raise ValueError(f"expected 2 fields, got {len(parts)}")
            entry = BFileEntry(index=int(parts[0]), value=int(parts[1]))
        except ValueError as e:
            raise ParseError(line_number, raw, sequence_id) from e
        if entries and entry.index <= entries[-1].index:
            raise ParseError(line_number, raw, sequence_id)
        entries.append(entry)

    return BFile(sequence_id=sequence_id or header_id or "", entries=entries)


def render_bfile(bfile: BFile) -> str:
    lines = [f"# {bfile.sequence_id}"] if bfile.sequence_id else []
    lines += [f"{entry.index} {entry.value}" for entry in bfile.entries]
    return "\n".join(lines) + "\n"


# --- Fetching ---

def _fetch_remote(sequence_id: str) -> str:
    url = f"{base_url()}/{sequence_id}/b{sequence_id[1:]}.txt"
    last_error: Optional[Exception] = None

    for attempt in range(MAX_ATTEMPTS):
        try:
            logger.info(f"Fetching {url} (attempt {attempt + 1}/{MAX_ATTEMPTS})")
            response = requests.get(url, timeout=_timeout_seconds())
        except (requests.ConnectionError, requests.Timeout) as e:
            last_error = e
            logger.warning(f"Transient network failure fetching {sequence_id}: {e}")
        except requests.RequestException as e:
            raise NetworkError(f"Request for {sequence_id} failed: {e}") from e
        else:
            if response.status_code == 404:
                raise NotFound(f"OEIS has no b-file for {sequence_id} at {url}")
            if response.status_code < 500:
                try:
                    response.raise_for_status()
                except requests.HTTPError as e:
                    raise NetworkError(f"OEIS rejected request for {sequence_id}: {e}") from e
                return response.text
            last_error = NetworkError(f"OEIS returned HTTP {response.status_code} for {sequence_id}")
            logger.warning(f"Server error fetching {sequence_id}: HTTP {response.status_code}")

        if attempt < MAX_ATTEMPTS - 1:
            time.sleep(_backoff_seconds())

    raise NetworkError(f"Failed to fetch {sequence_id} after {MAX_ATTEMPTS} attempts") from last_error


def fetch_bfile(
    sequence_id: str,
    source: DataSource = DataSource.FIXTURE,
    directory: Optional[Union[str, Path]] = None,
) -> BFile:
    """
    Loads a b-file from OEIS (one GET, one retry on transient failure) or from
    the fixture directory. Both paths share the same parser.
    """
    validate_sequence_id(sequence_id)
    source = DataSource(source)

    if source is DataSource.REMOTE:
        body = _fetch_remote(sequence_id)
    else:
        path = fixture_path(sequence_id, directory)
        if not path.is_file():
            raise NotFound(f"No fixture for {sequence_id} at {path}")
        logger.info(f"Loading {sequence_id} from fixture {path}")
        body = path.read_text(encoding="utf-8")

    return parse_bfile(body, sequence_id)


def save_fixture(bfile: BFile, directory: Optional[Union[str, Path]] = None) -> Path:
    """Writes a b-file into the fixture directory (explicit refresh action only)."""
    path = fixture_path(bfile.sequence_id, directory)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_bfile(bfile), encoding="utf-8")
    logger.info(f"Fixture for {bfile.sequence_id} written to {path}")
    return path


# --- Comparison ---

def compare_sequence(binding: SequenceBinding, bfile: BFile, count: Natural) -> ComparisonReport:
    """Compares F(n, m, k) for n = 1..count against the offset-aligned b-file terms."""
    # imported here: the engines depend on shared, not the other way round
    from engines.hypersum_eval.core_eval import closed_value

    values: Dict[int, int] = bfile.as_dict()
    usable = sum(1 for index in values if index >= binding.offset)
    needed = [binding.offset + n - 1 for n in range(1, count + 1)]
    if any(index not in values for index in needed):
        raise InsufficientTerms(binding.sequence_id, count, usable)

    mismatches: List[TermMismatch] = []
    anchors: Dict[int, str] = {}
    for n, index in enumerate(needed, start=1):
        expected = closed_value(n, binding.m, binding.k)
        if n <= 5:
            anchors[n] = str(expected)
        if values[index] != expected:
            mismatches.append(TermMismatch(n=n, index=index, expected=str(expected), actual=str(values[index])))

    if mismatches:
        logger.warning(f"{binding.sequence_id}: {len(mismatches)}/{count} terms differ from F(n,{binding.m},{binding.k})")
    else:
        logger.info(f"{binding.sequence_id}: first {count} terms match F(n,{binding.m},{binding.k})")
    return ComparisonReport(
        sequence_id=binding.sequence_id, m=binding.m, k=binding.k,
        count=count, mismatches=mismatches, anchors=anchors,
    )
