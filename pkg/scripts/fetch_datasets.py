#!/usr/bin/env python3
"""Download and convert the two public benchmark datasets into the CSV +
sidecar-schema layout this package reads. Needs outbound network access.

Outputs (under data/ by default):
  german.csv, german.schema            1000-row credit-risk table
  churn_train.csv, churn_valid.csv,    3333 / 1667-row telecom churn split
  churn.schema

Both datasets can also be supplied from local files with --german-data /
--churn-data / --churn-test if the archive mirrors are unreachable.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path

GERMAN_URLS = [
    "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/german/german.data",
    "https://raw.githubusercontent.com/daviddwlee84/MachineLearningPractice/master/Datasets/german/german.data",
]
# The churn split ships as churn.data (3333 train) + churn.test (1667
# validation); these mirrors carry the original MLC++ files.
CHURN_TRAIN_URLS = [
    "https://raw.githubusercontent.com/ageron/handson-ml/master/datasets/churn/churn.data",
    "https://raw.githubusercontent.com/jdwittenauer/ipython-notebooks/master/data/churn.data",
]
CHURN_TEST_URLS = [
    "https://raw.githubusercontent.com/ageron/handson-ml/master/datasets/churn/churn.test",
    "https://raw.githubusercontent.com/jdwittenauer/ipython-notebooks/master/data/churn.test",
]

GERMAN_SCHEMA = """\
checking_status = nominal
duration = numeric
credit_history = nominal
purpose = nominal
credit_amount = numeric
savings_status = nominal
employment = nominal
installment_commitment = numeric
personal_status = nominal
other_parties = nominal
residence_since = numeric
property_magnitude = nominal
age = numeric
other_payment_plans = nominal
housing = nominal
existing_credits = numeric
job = nominal
num_dependents = numeric
own_telephone = nominal
foreign_worker = nominal
class = target
positive_label = good
"""

CHURN_SCHEMA = """\
state = nominal
account_length = numeric
area_code = nominal
phone_number = identifier
international_plan = nominal
voice_mail_plan = nominal
number_vmail_messages = numeric
total_day_minutes = numeric
total_day_calls = numeric
total_day_charge = numeric
total_eve_minutes = numeric
total_eve_calls = numeric
total_eve_charge = numeric
total_night_minutes = numeric
total_night_calls = numeric
total_night_charge = numeric
total_intl_minutes = numeric
total_intl_calls = numeric
total_intl_charge = numeric
customer_service_calls = numeric
churn = target
positive_label = True
"""

CHURN_COLUMNS = [line.split(" = ")[0] for line in CHURN_SCHEMA.splitlines()[:-1]]
GERMAN_COLUMNS = [line.split(" = ")[0] for line in GERMAN_SCHEMA.splitlines()[:-1]]


def fetch_first(urls: list[str], label: str) -> str:
    last_error = None
    for url in urls:
        try:
            print(f"fetching {label} from {url} ...")
            with urllib.request.urlopen(url, timeout=60) as resp:
                return resp.read().decode("utf-8", errors="replace")
        except Exception as exc:  # noqa: BLE001 - try the next mirror
            print(f"  failed: {exc}")
            last_error = exc
    raise SystemExit(f"could not fetch {label} from any mirror: {last_error}")


def convert_german(raw: str, out_csv: Path) -> None:
    rows = [line.split() for line in raw.strip().splitlines()]
    if len(rows) != 1000 or any(len(r) != 21 for r in rows):
        raise SystemExit(
            f"german.data validation failed: {len(rows)} rows, "
            f"widths {sorted({len(r) for r in rows})} (expected 1000 x 21)"
        )
    labels = sorted({r[0] for r in rows})
    if labels != ["A11", "A12", "A13", "A14"]:
        raise SystemExit(f"german.data validation failed: attribute-1 labels {labels}")
    with out_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GERMAN_COLUMNS)
        for r in rows:
            writer.writerow(r[:-1] + ["good" if r[-1] == "1" else "bad"])
    print(f"wrote {out_csv} ({len(rows)} rows)")


def convert_churn(raw: str, out_csv: Path, expected_rows: int) -> list[list[str]]:
    reader = csv.reader(io.StringIO(raw.strip()))
    rows = [row for row in reader if row]
    if rows and rows[0][0].lower() in ("state", '"state"'):
        rows = rows[1:]  # some mirrors prepend a header
    if len(rows) != expected_rows or any(len(r) != 21 for r in rows):
        raise SystemExit(
            f"churn file validation failed: {len(rows)} rows, widths "
            f"{sorted({len(r) for r in rows})} (expected {expected_rows} x 21)"
        )
    cleaned = []
    for r in rows:
        r = [field.strip() for field in r]
        r[-1] = r[-1].rstrip(".")  # labels arrive as 'True.' / 'False.'
        cleaned.append(r)
    with out_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CHURN_COLUMNS)
        writer.writerows(cleaned)
    print(f"wrote {out_csv} ({len(cleaned)} rows)")
    return cleaned


def verify_churn_split(valid_rows: list[list[str]]) -> None:
    ip = CHURN_COLUMNS.index("international_plan")
    counts = {"no": 0, "yes": 0}
    for r in valid_rows:
        counts[r[ip].strip()] = counts.get(r[ip].strip(), 0) + 1
    expected = {"no": 1517, "yes": 150}
    if counts != expected:
        print(
            f"WARNING: validation-split international_plan counts {counts} differ "
            f"from the canonical split {expected}; per-group validation sizes will differ"
        )
    else:
        print("churn validation split verified: international_plan counts match")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=Path(__file__).resolve().parent.parent / "data")
    parser.add_argument("--german-data", help="local german.data instead of downloading")
    parser.add_argument("--churn-data", help="local churn.data (3333 rows)")
    parser.add_argument("--churn-test", help="local churn.test (1667 rows)")
    parser.add_argument("--skip-german", action="store_true")
    parser.add_argument("--skip-churn", action="store_true")
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if not args.skip_german:
        raw = (
            Path(args.german_data).read_text()
            if args.german_data
            else fetch_first(GERMAN_URLS, "german.data")
        )
        convert_german(raw, out / "german.csv")
        (out / "german.schema").write_text(GERMAN_SCHEMA)

    if not args.skip_churn:
        raw_train = (
            Path(args.churn_data).read_text()
            if args.churn_data
            else fetch_first(CHURN_TRAIN_URLS, "churn.data")
        )
        raw_test = (
            Path(args.churn_test).read_text()
            if args.churn_test
            else fetch_first(CHURN_TEST_URLS, "churn.test")
        )
        convert_churn(raw_train, out / "churn_train.csv", 3333)
        valid = convert_churn(raw_test, out / "churn_valid.csv", 1667)
        (out / "churn.schema").write_text(CHURN_SCHEMA)
        verify_churn_split(valid)

    print("done")


if __name__ == "__main__":
    main()
