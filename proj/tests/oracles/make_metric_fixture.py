"""Builds the trilingual scoring fixture and scores it with sacreBLEU 1.4.9.

Run inside an environment with sacrebleu==1.4.9 installed:
    python make_metric_fixture.py ../data/metrics
"""
import json
import random
import sys
from pathlib import Path

import sacrebleu
from sacrebleu.tokenizer import tokenize_v14_international

BAM = {
    "subj": ["A", "U", "N", "Musokɔrɔba", "Cɛ in", "Denmisɛnw", "Fanta", "Sekou"],
    "verb": ["bɛ taa", "ye dumuni kɛ", "bɛ baara kɛ", "ma na", "bɛ kalan kɛ",
             "ye ji min", "bɛ sɔgɔsɔgɔ", "ye wari di"],
    "tail": ["Bamakɔ.", "sugu la.", "so kɔnɔ.", "san 1938.", "kɔgɔji da la!",
             "sini?", "ni sɔgɔma ye.", "ka 3,5 sɔrɔ.", "(kɔrɔ: ɲɔ)", "--ka 20% sara."],
}
FR = {
    "subj": ["Il", "Elle", "Nous", "La vieille femme", "Cet homme", "Les enfants",
             "Fanta", "Sékou"],
    "verb": ["va", "a mangé", "travaille", "n'est pas venu", "étudie", "a bu de l'eau",
             "tousse", "a donné l'argent"],
    "tail": ["à Bamako.", "au marché.", "dans la maison.", "en 1938.", "au bord de la mer !",
             "demain ?", "le matin.", "pour gagner 3,5 francs.", "(c'est-à-dire : le mil)",
             "— payé 20 % de plus."],
}
EN = {
    "subj": ["He", "She", "We", "The old woman", "This man", "The children",
             "Fanta", "Sekou"],
    "verb": ["goes", "ate", "works", "did not come", "studies", "drank water",
             "coughs", "gave the money"],
    "tail": ["to Bamako.", "at the market.", "in the house.", "in 1938.", "by the sea!",
             "tomorrow?", "in the morning.", "to earn $3.50.", "(i.e. millet)",
             "-- paid 20% more."],
}


def sentences(table, rng, n):
    out = []
    for _ in range(n):
        out.append(" ".join([rng.choice(table["subj"]), rng.choice(table["verb"]),
                             rng.choice(table["tail"])]))
    return out


def perturb(ref, rng):
    words = ref.split()
    r = rng.random()
    if r < 0.12:
        return ref
    if r < 0.17:
        return ""
    if r < 0.35 and len(words) > 2:
        del words[rng.randrange(len(words))]
    elif r < 0.5 and len(words) > 2:
        i = rng.randrange(len(words) - 1)
        words[i], words[i + 1] = words[i + 1], words[i]
    elif r < 0.65:
        words.insert(rng.randrange(len(words) + 1), rng.choice(["le", "ka", "the", "bɛ", "«", "»"]))
    elif r < 0.8:
        i = rng.randrange(len(words))
        w = words[i]
        words[i] = w[:-1] if len(w) > 1 else w + w
    else:
        words = words[: max(1, len(words) // 2)]
    return " ".join(words)


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20201)
    golden = {}
    for lang, table in (("bam", BAM), ("fr", FR), ("en", EN)):
        refs = sentences(table, rng, 50)
        hyps = [perturb(r, rng) for r in refs]
        (out / f"ref.{lang}").write_text("\n".join(refs) + "\n", encoding="utf-8")
        (out / f"hyp.{lang}").write_text("\n".join(hyps) + "\n", encoding="utf-8")
        bleu = sacrebleu.corpus_bleu(hyps, [refs], tokenize="intl")
        chrf = sacrebleu.corpus_chrf(hyps, refs)
        golden[lang] = {
            "bleu": bleu.score,
            "precisions": bleu.precisions,
            "bp": bleu.bp,
            "sys_len": bleu.sys_len,
            "ref_len": bleu.ref_len,
            "chrf": chrf.score,
            "tokenized_hyp": [tokenize_v14_international(h.rstrip()) for h in hyps],
        }
    golden["signatures"] = {
        "bleu": "BLEU+case.mixed+numrefs.1+smooth.exp+tok.intl+version.1.4.9",
        "chrf": "chrF2+case.mixed+numchars.6+numrefs.1+space.False+version.1.4.9",
    }
    (out / "golden.json").write_text(json.dumps(golden, indent=1, ensure_ascii=False) + "\n",
                                     encoding="utf-8")




def render_table(out_dir):
    """Text and JSON results table for two systems on two directions.

    System (2) keeps the first half of each hypothesis file and leaves the
    rest empty.  Layout mirrors the C++ ResultsTable.
    """
    out = Path(out_dir)
    directions, rows = [], {"(1)": {}, "(2)": {}}
    desc = {"(1)": "fixture", "(2)": "half empty"}
    for lang in ("bam", "fr"):
        refs = (out / f"ref.{lang}").read_text(encoding="utf-8").splitlines()
        hyps = (out / f"hyp.{lang}").read_text(encoding="utf-8").splitlines()
        half = hyps[: len(hyps) // 2] + [""] * (len(refs) - len(hyps) // 2)
        d = "to-" + lang
        directions.append(d)
        for label, h in (("(1)", hyps), ("(2)", half)):
            rows[label][d] = (sacrebleu.corpus_bleu(h, [refs], tokenize="intl").score,
                              sacrebleu.corpus_chrf(h, refs).score)
    labels = ["(1)", "(2)"]
    ncol = 2 * len(directions)

    def cell(label, c):
        v = rows[label][directions[c // 2]][c % 2]
        return "%.*f" % (1 if c % 2 == 0 else 2, v)

    best = [max(float(cell(l, c)) for l in labels) for c in range(ncol)]
    grid = [["", "Configuration"] + [f"{d} {m}" for d in directions for m in ("BLEU", "ChrF")]]
    for l in labels:
        grid.append([l, desc[l]] + [cell(l, c) + ("*" if float(cell(l, c)) == best[c] else "")
                                    for c in range(ncol)])
    width = [max(len(r[c]) for r in grid) for c in range(len(grid[0]))]
    lines = []
    for i, r in enumerate(grid):
        parts = [r[c].ljust(width[c]) if c < 2 else r[c].rjust(width[c]) for c in range(len(r))]
        lines.append("  ".join(parts).rstrip())
        if i == 0:
            lines.append("-" * (sum(width) + 2 * (len(width) - 1)))
    lines.append("* best in column")
    (out / "table.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    doc = {
        "directions": directions,
        "bleu_signature": "BLEU+case.mixed+numrefs.1+smooth.exp+tok.intl+version.1.4.9",
        "chrf_signature": "chrF2+case.mixed+numchars.6+numrefs.1+space.False+version.1.4.9",
        "rows": [],
    }
    for l in labels:
        scores = {}
        for k, d in enumerate(directions):
            b, c = rows[l][d]
            scores[d] = {"bleu": b, "chrf": c,
                         "best_bleu": float(cell(l, 2 * k)) == best[2 * k],
                         "best_chrf": float(cell(l, 2 * k + 1)) == best[2 * k + 1]}
        doc["rows"].append({"label": l, "description": desc[l], "scores": scores})
    (out / "table.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "../data/metrics"
    main(target)
    render_table(target)
