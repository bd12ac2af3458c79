#!/usr/bin/env python3
"""Regenerates crates/slavner/tests/fixtures from scratch.

Deterministic: a fixed RNG seed and fixed quotas, so reruns reproduce
the committed files byte for byte. Run from anywhere:

    python3 tools/gen_fixtures.py
"""

import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "crates" / "slavner" / "tests" / "fixtures"

SEED = 20210307

# Matches the category enum order used by prediction-file rendering.
CAT_ORDER = {"PER": 0, "LOC": 1, "ORG": 2, "EVT": 3, "PRO": 4}


def write(relpath: str, text: str) -> None:
    path = FIXTURES / relpath
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"  {relpath}: {len(text.encode('utf-8'))} bytes")


# ---------------------------------------------------------------- lemma

# Syllable pools per language. No syllable ends in a character that a
# suffix rule of the same language keys on, so every surface ending
# selects exactly one rewrite rule and the mapping stays a function.
PL_SYL = ["bor", "dal", "gol", "kord", "lub", "mir", "now", "pol",
          "rad", "sol", "tar", "war", "zel", "bes", "wid", "les"]
CS_SYL = ["brn", "dub", "hol", "jab", "kol", "lib", "mor", "ost",
          "rak", "svi", "tab", "zli", "hrad", "pern"]
RU_SYL = ["бор", "вол", "гор", "дон", "зар", "ков", "лип", "мос",
          "нов", "пет", "рос", "сар", "тул", "хим"]

# rule name -> surface/lemma builders from a stem
RULES = {
    "pl:ie_a": lambda s: (s + "ie", s + "a"),
    "pl:u_drop": lambda s: (s + "u", s),
    "pl:y_a": lambda s: (s + "y", s + "a"),
    "pl:id": lambda s: (s, s),
    "cs:y_a": lambda s: (s + "y", s + "a"),
    "cs:a_o": lambda s: (s + "a", s + "o"),
    "cs:id": lambda s: (s, s),
    "ru:y_a": lambda s: (s + "ы", s + "а"),
    "ru:a_drop": lambda s: (s + "а", s),
    "ru:id": lambda s: (s, s),
}

SYLLABLES = {"pl": PL_SYL, "cs": CS_SYL, "ru": RU_SYL}


class StemFactory:
    """Hands out globally unique surfaces so cross-file dedup is a no-op
    and every tier count in the fixtures is an exact sum."""

    def __init__(self, rng):
        self.rng = rng
        self.surfaces = set()

    def pair(self, rule: str):
        lang = rule.split(":")[0]
        syllables = SYLLABLES[lang]
        while True:
            stem = (self.rng.choice(syllables) + self.rng.choice(syllables)).capitalize()
            surface, lemma = RULES[rule](stem)
            if surface not in self.surfaces:
                self.surfaces.add(surface)
                return surface, lemma

    def two_word_pair(self, adjectives):
        # SEJF-style inflected phrase: "<Adj>ej <Noun>y" -> "<Adj>a <Noun>a"
        while True:
            adj = self.rng.choice(adjectives)
            noun, noun_lemma = RULES["pl:y_a"](
                (self.rng.choice(PL_SYL) + self.rng.choice(PL_SYL)).capitalize()
            )
            surface = f"{adj}ej {noun}"
            if surface not in self.surfaces:
                self.surfaces.add(surface)
                return surface, f"{adj}a {noun_lemma}"


PL_ADJECTIVES = ["Now", "Star", "Mil", "Wielk", "Dobr", "Jasn", "Cich",
                 "Szar", "Mlod", "Zlot"]


def tsv(pairs):
    return "".join(f"{s}\t{l}\n" for s, l in pairs)


def lexicon_csv(pairs, tag):
    # layout: surface,lemma[.tag]; some rows carry no tag block
    rows = []
    for i, (s, l) in enumerate(pairs):
        if i % 5 == 4:
            rows.append(f"{s},{l}\n")
        else:
            rows.append(f"{s},{l}.{tag}\n")
    return "".join(rows)


def quota_pairs(factory, quotas):
    pairs = []
    for rule, count in quotas:
        for _ in range(count):
            pairs.append(factory.pair(rule))
    return pairs


def gen_lemma(rng):
    factory = StemFactory(rng)

    shared_pl = quota_pairs(factory, [("pl:ie_a", 6), ("pl:u_drop", 5),
                                      ("pl:y_a", 5), ("pl:id", 4)])
    shared_cs = quota_pairs(factory, [("cs:y_a", 4), ("cs:a_o", 3), ("cs:id", 3)])
    shared_ru = quota_pairs(factory, [("ru:y_a", 4), ("ru:a_drop", 3), ("ru:id", 3)])
    poleval = quota_pairs(factory, [("pl:ie_a", 8), ("pl:u_drop", 8),
                                    ("pl:y_a", 8), ("pl:id", 6)])
    sejf = [factory.two_word_pair(PL_ADJECTIVES) for _ in range(15)]
    sejfek = quota_pairs(factory, [("pl:ie_a", 3), ("pl:u_drop", 3),
                                   ("pl:y_a", 2), ("pl:id", 2)])
    translated_cs = quota_pairs(factory, [("cs:y_a", 1), ("cs:a_o", 1), ("cs:id", 1)])
    translated_ru = quota_pairs(factory, [("ru:y_a", 1), ("ru:id", 1)])
    identity = quota_pairs(factory, [("pl:id", 30)])

    write("lemma/shared-task-pl.tsv", tsv(shared_pl))
    write("lemma/shared-task-cs.tsv", tsv(shared_cs))
    write("lemma/shared-task-ru.tsv", tsv(shared_ru))
    write("lemma/poleval2019-pl.tsv", tsv(poleval))
    write("lemma/sejf-pl.csv", lexicon_csv(sejf, "subst:gen"))
    write("lemma/sejfek-pl.csv", lexicon_csv(sejfek, "adj"))
    write("lemma/translated-cs.tsv", tsv(translated_cs))
    write("lemma/translated-ru.tsv", tsv(translated_ru))
    write("lemma/identity-pl.tsv", tsv(identity))


# ------------------------------------------------------------- tagging

ENTITIES = {
    "PER": [["Adamow"], ["Borskow"], ["Celinow"], ["Darmow"], ["Emilow"],
            ["Filonow"]],
    "LOC": [["Markowo"], ["Zelowo"], ["Tarnowo"], ["Pilowo"], ["Granowo"],
            ["Nowe", "Lubowo"]],
    "ORG": [["Narbank"], ["Polbank"], ["Radbank"], ["Solbank"],
            ["Stara", "Rada"]],
    "EVT": [["Mirfest"], ["Zlotfest"], ["Kolfest"], ["Besfest"], ["Warfest"]],
    "PRO": [["Covidin"], ["Normin"], ["Lekarin"], ["Solvin"], ["Tarvin"]],
}

# Sentence templates: strings are literal filler tokens, category names
# are entity slots.
TEMPLATES = [
    ["PER", "odwiedzil", "LOC", "."],
    ["ORG", "oglosil", "raport", "o", "PRO", "."],
    ["EVT", "odbyl", "sie", "w", "LOC", "."],
    ["PER", "i", "PER", "pracuja", "w", "ORG", "."],
    ["delegacja", "z", "LOC", "przyjechala", "na", "EVT", "."],
    ["ORG", "kupil", "PRO", "od", "ORG", "."],
    ["PER", "mowil", "o", "EVT", "w", "LOC", "."],
    ["nowy", "PRO", "trafil", "do", "ORG", "."],
]


def gen_ner_overfit():
    counters = {cat: 0 for cat in ENTITIES}
    blocks = []
    for i in range(50):
        lines = []
        for item in TEMPLATES[i % len(TEMPLATES)]:
            if item in ENTITIES:
                pool = ENTITIES[item]
                tokens = pool[counters[item] % len(pool)]
                counters[item] += 1
                lines.append(f"{tokens[0]} B-{item}")
                lines.extend(f"{t} I-{item}" for t in tokens[1:])
            else:
                lines.append(f"{item} O")
        blocks.append("\n".join(lines))
    write("ner-overfit.conll", "\n\n".join(blocks) + "\n")


CATEGORIES = list(CAT_ORDER)

# Hand-picked ill-formed openers: lone inside tags, category switches
# mid-entity, inside runs after O. Tags are (gold, pred) per token.
ADVERSARIAL_OPENERS = [
    [("I-PER", "I-PER")],
    [("O", "B-LOC"), ("I-LOC", "I-LOC"), ("I-LOC", "O")],
    [("B-ORG", "I-ORG"), ("I-PER", "I-ORG"), ("I-PER", "B-PER")],
    [("B-EVT", "I-EVT"), ("B-EVT", "I-EVT"), ("I-EVT", "I-EVT")],
    [("I-PRO", "O")],
    [("O", "I-PER"), ("O", "I-LOC"), ("O", "I-ORG")],
    [("B-PER", "B-PER"), ("I-PER", "B-PER"), ("B-PER", "I-PER"),
     ("I-PER", "I-PER")],
    [("O", "I-LOC"), ("B-LOC", "B-LOC")],
]


def random_tag(rng):
    r = rng.random()
    if r < 0.45:
        return "O"
    prefix = "B" if r < 0.75 else "I"
    return f"{prefix}-{rng.choice(CATEGORIES)}"


def gen_adversarial(rng):
    sentences = [list(opener) for opener in ADVERSARIAL_OPENERS]
    while len(sentences) < 200:
        length = rng.randint(1, 10)
        sentences.append([(random_tag(rng), random_tag(rng)) for _ in range(length)])

    def column(index):
        blocks = []
        for sent in sentences:
            blocks.append("\n".join(f"w{i} {tags[index]}" for i, tags in enumerate(sent)))
        return "\n\n".join(blocks) + "\n"

    write("adversarial/gold.conll", column(0))
    write("adversarial/pred.conll", column(1))


# ------------------------------------------------------------ raw docs

# Each document: (doc id, language, date, title, body sentences,
# mentions as (form, lemma, category)). Every form occurs verbatim in
# the title or body, so projection matches it exactly.
DOCS = [
    ("pl-01", "pl", "2021-03-02", "Adamow byl w Warszawie",
     ["Rano Adamow przyjechal do Sejmu .",
      "Czlonkowie Sejmu pytali o Covidinu .",
      "Wieczorem Adamow wrocil ku Warszawie ."],
     [("Adamow", "Adamow", "PER"), ("Warszawie", "Warszawa", "LOC"),
      ("Sejmu", "Sejm", "ORG"), ("Covidinu", "Covidin", "PRO")]),
    ("pl-02", "pl", "2021-03-05", "Mirfest w Warszawie",
     ["Na Mirfest przyjechal Adamow .",
      "Delegacja Sejmu otworzyla Mirfest ."],
     [("Mirfest", "Mirfest", "EVT"), ("Warszawie", "Warszawa", "LOC"),
      ("Adamow", "Adamow", "PER"), ("Sejmu", "Sejm", "ORG")]),
    ("cs-01", "cs", "2021-03-03", "Pavlov dorazil do Prahy",
     ["Pavlov navstivil jednani Rady .",
      "Clenove Rady resili Normida .",
      "Potom Pavlov odjel z Prahy ."],
     [("Pavlov", "Pavlov", "PER"), ("Prahy", "Praha", "LOC"),
      ("Rady", "Rada", "ORG"), ("Normida", "Normido", "PRO")]),
    ("cs-02", "cs", "2021-03-06", "Kulfest zacal u Prahy",
     ["Lide prisli na Kulfest .",
      "Pavlov mluvil o Normida ."],
     [("Kulfest", "Kulfest", "EVT"), ("Prahy", "Praha", "LOC"),
      ("Pavlov", "Pavlov", "PER"), ("Normida", "Normido", "PRO")]),
    ("ru-01", "ru", "2021-03-04", "Иванов приехал из Москвы",
     ["Утром Иванов вышел из Думы .",
      "Члены Думы обсуждали план Ковидина .",
      "Вечером Иванов уехал из Москвы ."],
     [("Иванов", "Иванов", "PER"), ("Москвы", "Москва", "LOC"),
      ("Думы", "Дума", "ORG"), ("Ковидина", "Ковидин", "PRO")]),
    ("ru-02", "ru", "2021-03-07", "Зимфест прошел возле Москвы",
     ["Гости пришли на Зимфест .",
      "Иванов читал про Ковидина ."],
     [("Зимфест", "Зимфест", "EVT"), ("Москвы", "Москва", "LOC"),
      ("Иванов", "Иванов", "PER"), ("Ковидина", "Ковидин", "PRO")]),
]


def gen_raw_docs():
    for doc_id, lang, date, title, body, mentions in DOCS:
        url = f"https://example.org/news/{doc_id}"
        raw = "\n".join([doc_id, lang, date, url, title] + body) + "\n"
        write(f"raw/{lang}/{doc_id}.txt", raw)

        # same record order the prediction renderer produces
        records = sorted(mentions, key=lambda m: (m[0], m[1], CAT_ORDER[m[2]]))
        out = doc_id + "\n" + "".join(f"{f}\t{l}\t{c}\t0\n" for f, l, c in records)
        write(f"raw/{lang}/{doc_id}.out", out)


def main():
    rng = random.Random(SEED)
    print(f"writing fixtures under {FIXTURES}")
    gen_lemma(rng)
    gen_ner_overfit()
    gen_adversarial(rng)
    gen_raw_docs()


if __name__ == "__main__":
    main()
