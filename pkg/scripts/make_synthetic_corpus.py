#!/usr/bin/env python3
"""Write a small synthetic dataset (images + observer CSVs) in the harness layout."""
import argparse

from starfc.synthetic import make_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("root")
    ap.add_argument("--images", type=int, default=20)
    ap.add_argument("--categories", type=int, default=4)
    ap.add_argument("--width", type=int, default=256)
    ap.add_argument("--height", type=int, default=192)
    ap.add_argument("--observers", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    root = make_corpus(args.root, n_images=args.images, n_categories=args.categories,
                       width=args.width, height=args.height, n_observers=args.observers, seed=args.seed)
    print(root)


if __name__ == "__main__":
    main()
