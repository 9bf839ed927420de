"""Regenerate the WordNet test fixtures under crates/core/tests/data/wordnet.

Requires NLTK with the WordNet 3.0 corpus installed (LF line endings) and
reads data.noun / index.noun from that corpus directory. The golden Wu-Palmer
values are produced by NLTK's own `wup_similarity`.
"""
import os
import sys
import warnings

warnings.filterwarnings("ignore")
from nltk.corpus import wordnet as wn  # noqa: E402

OUT = sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/data/wordnet"
ROOT = wn.root if isinstance(wn.root, str) else str(wn.root)
WNDIR = os.path.join(os.path.expanduser("~"), "nltk_data", "corpora", "wordnet")

PAIRS = [
    ("dog.n.01", "cat.n.01"),
    ("goldfish.n.01", "shark.n.01"),
    ("swan.n.01", "parrot.n.01"),
    ("snowmobile.n.01", "motorcycle.n.01"),
    ("church.n.02", "window.n.01"),
    ("airplane.n.01", "helicopter.n.01"),
    ("dog.n.01", "airplane.n.01"),
    ("horse.n.01", "zebra.n.01"),
    ("apple.n.01", "banana.n.02"),
    ("car.n.01", "bicycle.n.01"),
    ("piano.n.01", "guitar.n.01"),
    ("tree.n.01", "flower.n.01"),
    ("goldfish.n.01", "goldfish.n.01"),
    ("chair.n.01", "table.n.02"),
    ("butterfly.n.01", "bee.n.01"),
    ("cup.n.01", "bottle.n.01"),
    ("mountain.n.01", "river.n.01"),
    ("hammer.n.02", "screwdriver.n.01"),
    ("elephant.n.01", "mouse.n.01"),
    ("person.n.01", "dog.n.01"),
]

# Seeds for the 50-synset parser excerpt; closed under hypernyms, padded with
# goldfish's co-hyponyms until exactly 50 records.
EXCERPT_SEEDS = ["goldfish.n.01", "dog.n.01", "cat.n.01"]
EXCERPT_SIZE = 50


def parents(s):
    return s.hypernyms() + s.instance_hypernyms()


def closure(synsets):
    seen = set()
    todo = list(synsets)
    while todo:
        s = todo.pop()
        if s in seen:
            continue
        seen.add(s)
        todo.extend(parents(s))
    return seen


def read_records():
    header, records = [], {}
    with open(os.path.join(WNDIR, "data.noun"), encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("  "):
                header.append(line)
            else:
                records[int(line[:8])] = line
    return header, records


def write_excerpt(path, header, records, offsets):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(header)
        for off in sorted(offsets):
            fh.write(records[off])


def main():
    os.makedirs(OUT, exist_ok=True)
    header, records = read_records()

    # golden wup pairs + closure
    pair_synsets = [wn.synset(n) for p in PAIRS for n in p]
    golden = closure(pair_synsets)
    write_excerpt(os.path.join(OUT, "golden_closure.data.noun"), header, records,
                  [s.offset() for s in golden])
    with open(os.path.join(OUT, "wup_golden.tsv"), "w", newline="\n") as fh:
        fh.write("# nltk %s wup_similarity over WordNet %s\n" % (
            __import__("nltk").__version__, wn.get_version()))
        fh.write("name1\tname2\tsynset1\tsynset2\twup\n")
        for a, b in PAIRS:
            sa, sb = wn.synset(a), wn.synset(b)
            fh.write("%s\t%s\tn%08d\tn%08d\t%.12f\n" % (
                a, b, sa.offset(), sb.offset(), sa.wup_similarity(sb)))

    # 50-synset excerpt
    base = closure([wn.synset(n) for n in EXCERPT_SEEDS])
    extra = sorted(
        (h for s in sorted(base, key=lambda s: s.offset()) for h in s.hyponyms()
         if h not in base and not h.hyponyms() and all(p in base for p in parents(h))),
        key=lambda s: s.offset(),
    )
    chosen = set(base)
    for h in extra:
        if len(chosen) >= EXCERPT_SIZE:
            break
        chosen.add(h)
    assert len(chosen) == EXCERPT_SIZE, len(chosen)
    offsets = sorted(s.offset() for s in chosen)
    write_excerpt(os.path.join(OUT, "excerpt50.data.noun"), header, records, offsets)
    edges = sum(len(parents(s)) for s in chosen)
    roots = [s for s in chosen if not parents(s)]
    print("excerpt nodes", len(chosen), "edges", edges, "roots",
          ["n%08d" % r.offset() for r in roots])

    # index.noun lines for every lemma of the excerpt
    lemmas = {l.lower() for s in chosen for l in s.lemma_names()}
    with open(os.path.join(WNDIR, "index.noun"), encoding="utf-8") as src, \
            open(os.path.join(OUT, "excerpt50.index.noun"), "w", newline="\n") as dst:
        for line in src:
            if line.startswith("  ") or line.split(" ", 1)[0] in lemmas:
                dst.write(line)

    # malformed variants
    lines = open(os.path.join(OUT, "excerpt50.data.noun"), encoding="utf-8").read().splitlines(True)
    body = [i for i, l in enumerate(lines) if not l.startswith("  ")]
    gold = next(i for i in body if lines[i].startswith("%08d" % wn.synset("goldfish.n.01").offset()))

    trunc = list(lines)
    rec = trunc[gold].split(" | ")[0].split(" ")
    # drop the final pointer (4 fields) so p_cnt no longer matches
    trunc[gold] = " ".join(rec[:-4]) + " | truncated pointer list\n"
    open(os.path.join(OUT, "malformed_field_count.data.noun"), "w", newline="\n").writelines(trunc)

    dangling = list(lines)
    parent = "%08d" % wn.synset("goldfish.n.01").hypernyms()[0].offset()
    dangling = [l for l in dangling if not l.startswith(parent)]
    open(os.path.join(OUT, "malformed_dangling.data.noun"), "w", newline="\n").writelines(dangling)

    cyc = list(lines)
    ent = wn.synset("entity.n.01").offset()
    i = next(i for i in body if cyc[i].startswith("%08d" % ent))
    gold_off = "%08d" % wn.synset("goldfish.n.01").offset()
    head, gloss = cyc[i].split(" | ", 1)
    f = head.split(" ")
    wcnt = int(f[3], 16)
    pidx = 4 + 2 * wcnt
    pcnt = int(f[pidx])
    f[pidx] = "%03d" % (pcnt + 1)
    f[pidx + 1:pidx + 1] = ["@", gold_off, "n", "0000"]
    cyc[i] = " ".join(f) + " | " + gloss
    open(os.path.join(OUT, "malformed_cycle.data.noun"), "w", newline="\n").writelines(cyc)


if __name__ == "__main__":
    main()
