"""Write a labeled synthetic dialogue corpus whose labels follow a cue word in the response."""

import argparse

from sarcctx.corpus import Source, write_corpus
from sarcctx.synthetic import separable_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output")
    ap.add_argument("-n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--source", choices=[s.value for s in Source], default="twitter")
    ap.add_argument("--max-context", type=int, default=4)
    ap.add_argument("--unlabeled", action="store_true")
    args = ap.parse_args()
    corpus = separable_corpus(args.n, seed=args.seed, source=Source(args.source),
                              max_context=args.max_context, labeled=not args.unlabeled)
    write_corpus(corpus, args.output)
    print(f"wrote {len(corpus)} records to {args.output}")


if __name__ == "__main__":
    main()
