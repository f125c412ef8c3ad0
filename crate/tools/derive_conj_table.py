#!/usr/bin/env python3
"""Derive the shipped conjugation rule table from a compiled IPADic.

Reads the feature strings stored in ``sys.dic`` (pip packages ``ipadic`` and
``mecab-python3``), keeps entries whose lemma is written in hiragana (so the
reading column spells the surface), and turns every (type, form) cell into a
suffix rewrite relative to the per-type lemma ending below.

    python3 tools/derive_conj_table.py > crates/core/data/conj_rules.tsv
"""
import collections
import re
import sys

import ipadic

ENDINGS = {
    "五段・カ行イ音便": "く", "五段・カ行促音便": "く", "五段・カ行促音便ユク": "く",
    "五段・ガ行": "ぐ", "五段・サ行": "す", "五段・タ行": "つ", "五段・ナ行": "ぬ",
    "五段・バ行": "ぶ", "五段・マ行": "む", "五段・ラ行": "る", "五段・ラ行特殊": "る",
    "五段・ラ行アル": "る", "五段・ワ行ウ音便": "う", "五段・ワ行促音便": "う",
    "一段": "る", "一段・クレル": "れる", "一段・得ル": "る",
    "カ変・クル": "くる", "カ変・来ル": "来る",
    "サ変・スル": "する", "サ変・−スル": "する", "サ変・−ズル": "ずる",
    "形容詞・アウオ段": "い", "形容詞・イ段": "い", "形容詞・イイ": "い", "不変化型": "",
    "特殊・ダ": "だ", "特殊・デス": "す", "特殊・タ": "", "特殊・マス": "す",
    "特殊・ナイ": "ない", "特殊・タイ": "たい", "特殊・ヌ": "ぬ",
    "特殊・ジャ": "", "特殊・ヤ": "",
}

# First entry is the canonical (rank 0) surface for cells with several spellings.
PREFER = {
    ("サ変・スル", "未然ウ接続"): ["しよ", "しょ"],
    ("サ変・−スル", "未然ウ接続"): ["しよ", "しょ"],
    ("特殊・ダ", "未然形"): ["だろ", "だら"],
    ("特殊・ヌ", "仮定形"): ["ね", "ざれ", "ずん"],
    ("特殊・タイ", "連用タ接続"): ["たかっ", "たかつ"],
    ("特殊・ナイ", "連用タ接続"): ["なかっ", "なかつ"],
    ("特殊・タイ", "音便基本形"): ["てぇ", "てえ"],
    ("特殊・ナイ", "音便基本形"): ["ねぇ", "ねえ"],
    ("形容詞・アウオ段", "連用ゴザイ接続"): ["う", "ぅ"],
    ("形容詞・イ段", "連用ゴザイ接続"): ["ゅう", "ゅぅ"],
    ("形容詞・イイ", "基本形-促音便"): ["いっ"],
}

# The kanji-written カ変 verb keeps its okurigana after 来; readings cannot spell it.
KURU_KANJI = {
    "基本形": "来る", "未然形": "来", "未然ウ接続": "来よ", "連用形": "来",
    "仮定形": "来れ", "仮定縮約１": "来りゃ", "命令ｉ": "来い", "命令ｙｏ": "来よ",
    "体言接続特殊": "来ん", "体言接続特殊２": "来",
}

FORM_ORDER = [
    "基本形", "未然形", "未然ウ接続", "未然ヌ接続", "未然レル接続", "未然特殊",
    "連用形", "連用タ接続", "連用テ接続", "連用デ接続", "連用ゴザイ接続", "連用ニ接続",
    "仮定形", "仮定縮約１", "仮定縮約２", "命令ｅ", "命令ｉ", "命令ｒｏ", "命令ｙｏ",
    "体言接続", "体言接続特殊", "体言接続特殊２", "ガル接続", "音便基本形",
    "文語基本形", "現代基本形", "基本形-促音便",
]

HIRAGANA = re.compile(r"^[ぁ-ゖー]+$")


def to_hiragana(s):
    return "".join(chr(ord(c) - 0x60) if "ァ" <= c <= "ヶ" else c for c in s)


def feature_strings(path):
    data = open(path, "rb").read()
    for m in re.finditer(rb"[^\x00]{6,}", data):
        try:
            s = m.group().decode("utf-8")
        except UnicodeDecodeError:
            continue
        if s.count(",") >= 6:
            yield s


def main():
    cells = collections.defaultdict(collections.Counter)
    for feat in set(feature_strings(ipadic.DICDIR + "/sys.dic")):
        f = feat.split(",")
        if len(f) < 9 or f[4] not in ENDINGS or f[4] == "カ変・来ル":
            continue
        ctype, form, lemma, reading = f[4], f[5], f[6], f[7]
        ending = ENDINGS[ctype]
        if not HIRAGANA.match(lemma) or not lemma.endswith(ending):
            continue
        # いう is listed with reading ユウ; the reading does not spell the surface.
        if lemma == "いう":
            continue
        surface = to_hiragana(reading)
        stem = lemma[: len(lemma) - len(ending)]
        if surface.startswith(stem):
            cells[(ctype, form)][surface[len(stem):]] += 1
    for form, append in KURU_KANJI.items():
        cells[("カ変・来ル", form)][append] = 1

    out = sys.stdout
    out.write("# conj_type\tconj_form\tstrip\tappend\tvariant_rank\n")
    out.write("# Derived from IPADic (mecab-ipadic 2.7.0) by tools/derive_conj_table.py.\n")
    for ctype, ending in ENDINGS.items():
        forms = sorted({f for (t, f) in cells if t == ctype}, key=FORM_ORDER.index)
        for form in forms:
            counts = cells[(ctype, form)]
            if form == "基本形":
                cands = [ending]
            elif (ctype, form) in PREFER:
                cands = [a for a in PREFER[(ctype, form)] if a in counts]
            else:
                cands = sorted(counts, key=lambda a: (-counts[a], len(a), a))
            for rank, append in enumerate(cands):
                out.write(f"{ctype}\t{form}\t{ending}\t{append}\t{rank}\n")


if __name__ == "__main__":
    main()
