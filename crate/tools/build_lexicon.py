"""Extract a single-word synonym lexicon from WordNet 3.0 dict files.

Usage: python3 tools/build_lexicon.py <wordnet-dict-dir> > crates/core/data/synonyms.tsv

Only lemmas with a non-zero sense-tag count are kept as headwords, synonyms are
taken from the two most frequent senses, and multi-word lemmas are dropped so a
substitution never changes a document's token count.
"""
import os
import re
import sys

MAX_SENSES = 2
MAX_SYNONYMS = 8
WORD = re.compile(r"^[a-z]+$")


def read_synsets(root, pos):
    synsets = {}
    with open(os.path.join(root, "data." + pos), encoding="latin-1") as fh:
        for line in fh:
            if line.startswith("  "):
                continue
            parts = line.split()
            offset, n = parts[0], int(parts[3], 16)
            lemmas = [parts[4 + 2 * i].lower() for i in range(n)]
            lemmas = [re.sub(r"\(.*\)$", "", l) for l in lemmas]
            synsets[offset] = lemmas
    return synsets


def main(root):
    lexicon = {}
    for pos in ("noun", "verb", "adj", "adv"):
        synsets = read_synsets(root, pos)
        with open(os.path.join(root, "index." + pos), encoding="latin-1") as fh:
            for line in fh:
                if line.startswith("  "):
                    continue
                parts = line.split()
                lemma = parts[0]
                if not WORD.match(lemma):
                    continue
                synset_cnt = int(parts[2])
                p_cnt = int(parts[3])
                tagsense_cnt = int(parts[5 + p_cnt])
                if tagsense_cnt == 0:
                    continue
                offsets = parts[6 + p_cnt: 6 + p_cnt + synset_cnt]
                syns = lexicon.setdefault(lemma, [])
                for off in offsets[:MAX_SENSES]:
                    for cand in synsets[off]:
                        if cand != lemma and WORD.match(cand) and cand not in syns:
                            syns.append(cand)
    out = sys.stdout
    out.write("# Single-word synonyms extracted from Princeton WordNet 3.0.\n")
    out.write("# WordNet license: see https://wordnet.princeton.edu/license-and-commercial-use\n")
    for word in sorted(lexicon):
        syns = lexicon[word][:MAX_SYNONYMS]
        if syns:
            out.write(word + "\t" + ",".join(syns) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
