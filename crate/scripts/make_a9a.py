#!/usr/bin/env python3
"""Rebuild an a9a-format sparse file from the raw UCI Adult training file.

a9a encodes Adult's 14 attributes as 123 binary indicators: continuous
attributes are split into quantile bins (age, fnlwgt, education-num and
hours-per-week into 5 bins, capital-gain and capital-loss into zero/nonzero)
and each categorical attribute is one-hot encoded. Missing values ("?") set
no indicator. Bin edges are recomputed from the data, so individual rows may
differ slightly from the published a9a file.

The raw file ships inside the `responsibly` wheel on PyPI:

    pip download --no-deps responsibly==0.1.2 -d /tmp/wheel
    python3 scripts/make_a9a.py --wheel /tmp/wheel/responsibly-0.1.2-py3-none-any.whl \
        --out data/a9a
"""
import argparse
import zipfile

CATEGORIES = {
    1: "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, State-gov, Without-pay, Never-worked",
    3: "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, Assoc-voc, 9th, 7th-8th, 12th, Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    5: "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, Married-spouse-absent, Married-AF-spouse",
    6: "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, Prof-specialty, Handlers-cleaners, Machine-op-inspct, Adm-clerical, Farming-fishing, Transport-moving, Priv-house-serv, Protective-serv, Armed-Forces",
    7: "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    8: "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    9: "Female, Male",
    13: "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, Outlying-US(Guam-USVI-etc), India, Japan, Greece, South, China, Cuba, Iran, Honduras, Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, Portugal, Ireland, France, Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, Guatemala, Nicaragua, Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, Holand-Netherlands",
}
QUANTILE = {0: 5, 2: 5, 4: 5, 12: 5}
ZERO_NONZERO = {10, 11}


def quantile_edges(values, bins):
    s = sorted(values)
    return [s[(len(s) * k) // bins] for k in range(1, bins)]


def bin_of(x, edges):
    b = 0
    while b < len(edges) and x >= edges[b]:
        b += 1
    return b


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel", help="path to the responsibly wheel")
    ap.add_argument("--adult", help="path to a raw adult.data file")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    if args.adult:
        raw = open(args.adult, encoding="utf-8").read()
    else:
        raw = zipfile.ZipFile(args.wheel).read("responsibly/dataset/adult/adult.data").decode()
    rows = [[t.strip() for t in line.split(",")] for line in raw.splitlines() if line.strip()]
    rows = [r for r in rows if len(r) == 15]

    edges = {c: quantile_edges([float(r[c]) for r in rows], b) for c, b in QUANTILE.items()}
    layout = []
    offset = 1
    for col in range(14):
        if col in QUANTILE:
            width = QUANTILE[col]
        elif col in ZERO_NONZERO:
            width = 2
        else:
            width = len(CATEGORIES[col].split(", "))
        layout.append(offset)
        offset += width
    assert offset - 1 == 123, offset

    cats = {c: {name: k for k, name in enumerate(v.split(", "))} for c, v in CATEGORIES.items()}
    with open(args.out, "w", encoding="utf-8") as out:
        for r in rows:
            label = "+1" if r[14].startswith(">50K") else "-1"
            idx = []
            for col in range(14):
                v = r[col]
                if v == "?":
                    continue
                if col in QUANTILE:
                    k = bin_of(float(v), edges[col])
                elif col in ZERO_NONZERO:
                    k = 0 if float(v) == 0 else 1
                else:
                    k = cats[col][v]
                idx.append(layout[col] + k)
            out.write(label + " " + " ".join(f"{i}:1" for i in sorted(idx)) + "\n")


if __name__ == "__main__":
    main()
