#!/usr/bin/env python3
"""Build the MeCab/IPADic-analyzed test fixtures.

Candidate sentences are assembled from a lemma list, the shipped rule table
and per-form continuations, then analyzed with MeCab + IPADic. A candidate is
kept only when the analyzer reports the intended (lemma, type, form) and
every predicate in the sentence is reproduced by the rank-0 rule for its
(type, form). The analyzer output is written verbatim.

    python3 tools/make_fixtures.py crates/core/tests/fixtures
"""
import collections
import os
import random
import sys

import ipadic
import MeCab

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "crates", "core", "data")
PREDICATES = {"動詞", "形容詞", "助動詞"}

VERBS = [
    ("歩く", "五段・カ行イ音便", "公園を"), ("書く", "五段・カ行イ音便", "手紙を"),
    ("聞く", "五段・カ行イ音便", "音楽を"), ("働く", "五段・カ行イ音便", "会社で"),
    ("行く", "五段・カ行促音便", "学校へ"), ("ゆく", "五段・カ行促音便ユク", "遠くへ"),
    ("泳ぐ", "五段・ガ行", "海で"), ("急ぐ", "五段・ガ行", "駅へ"),
    ("話す", "五段・サ行", "英語を"), ("探す", "五段・サ行", "鍵を"),
    ("待つ", "五段・タ行", "バスを"), ("持つ", "五段・タ行", "荷物を"),
    ("死ぬ", "五段・ナ行", "ここで"), ("遊ぶ", "五段・バ行", "庭で"),
    ("呼ぶ", "五段・バ行", "名前を"), ("読む", "五段・マ行", "本を"),
    ("飲む", "五段・マ行", "水を"), ("走る", "五段・ラ行", "道を"),
    ("作る", "五段・ラ行", "料理を"), ("帰る", "五段・ラ行", "家に"),
    ("なさる", "五段・ラ行特殊", "勉強を"), ("おっしゃる", "五段・ラ行特殊", "そう"),
    ("問う", "五段・ワ行ウ音便", "責任を"), ("買う", "五段・ワ行促音便", "パンを"),
    ("使う", "五段・ワ行促音便", "辞書を"), ("会う", "五段・ワ行促音便", "友達に"),
    ("食べる", "一段", "りんごを"), ("見る", "一段", "映画を"),
    ("起きる", "一段", "朝早く"), ("教える", "一段", "数学を"),
    ("くれる", "一段・クレル", "本を"), ("うる", "一段・得ル", "あり"),
    ("くる", "カ変・クル", "戻って"), ("来る", "カ変・来ル", "ここに"),
    ("する", "サ変・スル", "勉強を"), ("愛する", "サ変・−スル", "家族を"),
    ("察する", "サ変・−スル", "気持ちを"), ("信ずる", "サ変・−ズル", "神を"),
    ("論ずる", "サ変・−ズル", "問題を"),
]

ADJECTIVES = [
    ("高い", "形容詞・アウオ段", "山が"), ("赤い", "形容詞・アウオ段", "花が"),
    ("強い", "形容詞・アウオ段", "風が"), ("早い", "形容詞・アウオ段", "朝が"),
    ("美しい", "形容詞・イ段", "景色が"), ("楽しい", "形容詞・イ段", "旅行が"),
    ("新しい", "形容詞・イ段", "車が"), ("いい", "形容詞・イイ", "天気が"),
]

VERB_CONT = {
    "基本形": ["。", "ことが好きだ。", "つもりです。"],
    "未然形": ["ない。", "なかった。", "せる。", "れる。"],
    "未然ウ接続": ["う。", "うと思う。"],
    "未然ヌ接続": ["ず。", "ずに帰った。", "ぬ。"],
    "未然レル接続": ["れる。", "られる。"],
    "未然特殊": ["ない。"],
    "連用形": ["ます。", "ました。", "たい。", "ながら笑う。", "ませんでした。"],
    "連用タ接続": ["た。", "て。", "ている。", "たら良い。"],
    "仮定形": ["ば良い。", "ば分かる。"],
    "仮定縮約１": ["いい。"],
    "命令ｅ": ["。", "！"],
    "命令ｉ": ["。"],
    "命令ｒｏ": ["。", "！"],
    "命令ｙｏ": ["。"],
    "体言接続特殊": ["の？"],
    "体言接続特殊２": ["な。"],
    "文語基本形": ["べし。"],
}

ADJ_CONT = {
    "基本形": ["。", "です。", "と思う。"],
    "未然ウ接続": ["う。"],
    "未然ヌ接続": ["ず。"],
    "連用タ接続": ["た。", "たです。"],
    "連用テ接続": ["ない。", "て良い。", "なる。"],
    "連用ゴザイ接続": ["ございます。"],
    "仮定形": ["ば良い。"],
    "仮定縮約１": ["いい。"],
    "仮定縮約２": ["いい。"],
    "命令ｅ": ["。"],
    "体言接続": ["もの。"],
    "ガル接続": ["がる。"],
    "文語基本形": ["。"],
    "基本形-促音便": ["す。"],
}

SUBJECTS = ["私は", "彼は", "彼女は", "先生は", "子供たちは", "友達は", "兄は", "母は"]

# Sentences exercising auxiliary verbs and inflection classes the templates miss.
HANDWRITTEN = """
私 は 走る 。
彼 は 古来 まれ な 大 政治 家 で ある 。
これ を 下ろす の 手伝っ て ください 。
明日 は 雨 だろ う 。
彼 は 学生 で は ない 。
昨日 は 静か だっ た 。
行く なら 早く 行け 。
静か な 部屋 が 好き だ 。
あれ が 駅 です 。
明日 は 晴れる でしょ う 。
とても 楽しかっ た です 。
少し 休み ましょ う 。
お 入り ください ませ 。
どうぞ お 休み なさい まし 。
ここ に 座り ませ ん か 。
もう 遅い から 帰り ます 。
寒く なけれ ば 出かける 。
行か なきゃ なら ない 。
失敗 を 恐れる なかれ 。
疑う 余地 の なき 事実 だ 。
食べ たけれ ば 食べ て よい 。
水 が 飲み たい 。
もっと 遊び たかっ た 。
何 も 言わ ず に 去っ た 。
知ら ぬ 間 に 雨 が 降っ た 。
負け ざる こと を 願う 。
行か ね ば なら ない 。
それ は 嘘 じゃ 。
そう じゃろ う 。
ほんま に ええ 人 や 。
あかん やろ 。
雨 やっ た 。
もう 二度 と 行く まい 。
あり 得る 話 だ 。
ゆっくり 歩こ う 。
本 を 読ん で ください 。
彼女 は 歌っ て いる 。
先生 が いらっしゃる 。
お 茶 を くださる 方 は どなた です か 。
それ で ござる 。
ここ に ある 本 を 読む 。
彼 は 速く 走れ ない 。
窓 を 開けろ 。
早く 起きろ 。
静か に しろ 。
勉強 せよ 。
こっち へ 来い 。
もう 少し 待て 。
テレビ を 見よ う 。
明日 また 来よ う 。
""".strip().splitlines()


def load_rules():
    rules, endings = {}, {}
    with open(os.path.join(DATA, "lemma_endings.tsv"), encoding="utf-8") as f:
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            t, e = line.rstrip("\n").split("\t")
            endings[t] = e
    with open(os.path.join(DATA, "conj_rules.tsv"), encoding="utf-8") as f:
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            t, form, strip, append, rank = line.rstrip("\n").split("\t")
            if rank == "0":
                rules[(t, form)] = (strip, append)
    return rules, endings


def inflect(rules, lemma, ctype, form):
    strip, append = rules[(ctype, form)]
    assert lemma.endswith(strip), (lemma, ctype, form)
    return lemma[: len(lemma) - len(strip)] + append


def analyze(tagger, text):
    lines = tagger.parse(text).rstrip("\n").split("\n")
    assert lines[-1] == "EOS"
    return lines[:-1]


def morphemes(lines):
    for line in lines:
        surface, feats = line.split("\t")
        yield surface, feats.split(",")


def restorable(rules, lines):
    for surface, f in morphemes(lines):
        if f[0] in PREDICATES and f[4] != "*":
            if (f[4], f[5]) not in rules:
                return False
            lemma = surface if f[6] == "*" else f[6]
            try:
                if inflect(rules, lemma, f[4], f[5]) != surface:
                    return False
            except AssertionError:
                return False
    return True


def has_target(lines, lemma, ctype, form):
    return any(f[6] == lemma and f[4] == ctype and f[5] == form for _, f in morphemes(lines))


def candidates(rules):
    for entries, conts in ((VERBS, VERB_CONT), (ADJECTIVES, ADJ_CONT)):
        for lemma, ctype, obj in entries:
            for (t, form), _ in sorted(rules.items()):
                if t != ctype or form not in conts:
                    continue
                surface = inflect(rules, lemma, ctype, form)
                for cont in conts[form]:
                    for subj in SUBJECTS:
                        yield (lemma, ctype, form), subj + obj + surface + cont


def main():
    out_dir = sys.argv[1]
    os.makedirs(out_dir, exist_ok=True)
    tagger = MeCab.Tagger(ipadic.MECAB_ARGS)
    rules, _ = load_rules()
    rng = random.Random(20181030)

    by_target = collections.defaultdict(list)
    rejected = collections.Counter()
    for target, text in candidates(rules):
        lines = analyze(tagger, text)
        if not has_target(lines, *target):
            rejected["analysis-mismatch"] += 1
            continue
        if not restorable(rules, lines):
            rejected["not-restorable"] += 1
            continue
        by_target[target].append(lines)

    chosen = []
    for target in sorted(by_target):
        pool = by_target[target]
        rng.shuffle(pool)
        chosen.extend(pool[:3])

    hand = []
    for text in HANDWRITTEN:
        lines = analyze(tagger, text.replace(" ", ""))
        if restorable(rules, lines):
            hand.append(lines)
        else:
            rejected["handwritten-not-restorable"] += 1
            print("drop:", text, file=sys.stderr)

    sentences = hand + chosen
    with open(os.path.join(out_dir, "analyzed.mecab"), "w", encoding="utf-8") as f:
        for lines in sentences:
            f.write("\n".join(lines) + "\nEOS\n")
    with open(os.path.join(out_dir, "small.mecab"), "w", encoding="utf-8") as f:
        for lines in hand[:20]:
            f.write("\n".join(lines) + "\nEOS\n")

    types = collections.Counter()
    for lines in sentences:
        for _, feats in morphemes(lines):
            if feats[0] in PREDICATES and feats[4] != "*":
                types[feats[4]] += 1
    print(f"sentences={len(sentences)} handwritten={len(hand)} targets={len(by_target)}", file=sys.stderr)
    print("rejected:", dict(rejected), file=sys.stderr)
    for t, n in sorted(types.items()):
        print(f"  {t}\t{n}", file=sys.stderr)


if __name__ == "__main__":
    main()
