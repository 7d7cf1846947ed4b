"""Write a corpus of synthetic fault bundles plus truth.json.

    python scripts/make_synthetic_corpus.py corpus/ --count 40 --seed 0
"""
import argparse

from faultloc.synthetic import write_corpus


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out", help="corpus directory (created if missing)")
    p.add_argument("--count", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-record", action="store_true", help="skip recording a mock_script.json per bundle")
    args = p.parse_args()
    faults = write_corpus(args.out, args.count, args.seed, record=not args.no_record)
    print(f"wrote {len(faults)} bundles and truth.json to {args.out}")


if __name__ == "__main__":
    main()
