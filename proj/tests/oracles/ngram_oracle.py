"""Freeze pycocoevalcap scores for the n-gram fixture corpus.

Sentences are already lowercase and unpunctuated, so whitespace splitting
(what the scorers do internally) is the tokenization.
"""
import json
import sys
from pathlib import Path

from pycocoevalcap.bleu.bleu import Bleu
from pycocoevalcap.cider.cider import Cider
from pycocoevalcap.rouge.rouge import Rouge

here = Path(__file__).resolve().parent
corpus = json.loads((here.parent / "fixtures" / "ngram_corpus.json").read_text())["images"]

gts = {im["id"]: im["references"] for im in corpus}
res = {im["id"]: [im["candidate"]] for im in corpus}
ids = [im["id"] for im in corpus]

bleu_corpus, bleu_per = Bleu(4).compute_score(gts, res, verbose=0)
rouge_mean, rouge_per = Rouge().compute_score(gts, res)
cider_mean, cider_per = Cider().compute_score(gts, res)


def sentence_bleu4(cand, refs):
    _, per = Bleu(4).compute_score({"x": refs}, {"x": [cand]}, verbose=0)
    return per[3][0]


def self_bleu(captions):
    scores = [sentence_bleu4(c, captions[:i] + captions[i + 1:]) for i, c in enumerate(captions)]
    return sum(scores) / len(scores)


out = {
    "source": "pycocoevalcap Bleu(4) / Rouge / Cider",
    "ids": ids,
    "corpus_bleu4": bleu_corpus[3],
    "sentence_bleu4": [sentence_bleu4(im["candidate"], im["references"]) for im in corpus],
    "rouge_l": [float(x) for x in rouge_per],
    "rouge_l_mean": float(rouge_mean),
    "cider": float(cider_mean),
    "cider_per_image": [float(x) for x in cider_per],
    "self_bleu": [self_bleu([im["candidate"]] + im["references"]) for im in corpus],
}
json.dump(out, sys.stdout, indent=1)
print()
