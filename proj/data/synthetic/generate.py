#!/usr/bin/env python3
"""Regenerates the bundled synthetic corpus. Output is fixed by the seed."""

import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
rng = random.Random(20191)

NOUNS = ["cat", "dog", "river", "city", "teacher", "garden", "machine", "story", "window", "friend",
         "market", "bridge", "letter", "song", "island", "engine", "forest", "kitchen", "planet", "idea"]
VERBS = ["sees", "builds", "finds", "likes", "paints", "opens", "follows", "remembers", "crosses", "moves"]
ADJS = ["old", "small", "green", "quiet", "bright", "strange", "famous", "broken", "warm", "distant"]
OTHER = ["today", "again", "slowly", "there", "together", "already", "often", "never"]
PT = {"cat": "gato", "dog": "cão", "river": "rio", "city": "cidade", "teacher": "professor",
      "garden": "jardim", "machine": "máquina", "story": "história", "window": "janela", "friend": "amigo",
      "market": "mercado", "bridge": "ponte", "letter": "carta", "song": "canção", "island": "ilha",
      "engine": "motor", "forest": "floresta", "kitchen": "cozinha", "planet": "planeta", "idea": "ideia",
      "sees": "vê", "builds": "constrói", "finds": "encontra", "likes": "gosta", "paints": "pinta",
      "opens": "abre", "follows": "segue", "remembers": "lembra", "crosses": "atravessa", "moves": "move",
      "old": "velho", "small": "pequeno", "green": "verde", "quiet": "calmo", "bright": "brilhante",
      "strange": "estranho", "famous": "famoso", "broken": "quebrado", "warm": "quente",
      "distant": "distante", "today": "hoje", "again": "outra vez", "slowly": "devagar", "there": "lá",
      "together": "juntos", "already": "já", "often": "muitas vezes", "never": "nunca", "the": "o",
      "a": "um", "and": "e"}


def clause():
    words = ["the", rng.choice(ADJS), rng.choice(NOUNS), rng.choice(VERBS), "a", rng.choice(NOUNS)]
    if rng.random() < 0.5:
        words.append(rng.choice(OTHER))
    return words


def sentence(long=False):
    words = clause()
    for _ in range(7 if long else rng.randrange(0, 2)):
        words += ["and"] + clause()
    return words


def raw_text(words, lang):
    out = [PT[w] if lang == "pt" else w for w in words]
    text = " ".join(out)
    text = text[0].upper() + text[1:]
    if rng.random() < 0.3:
        text = text.replace(" and ", ", and " if lang == "en" else ", e ", 1)
    end = rng.choice([".", ".", "!", "?"])
    text += end
    if rng.random() < 0.15:
        text += " (Laughter)" if rng.random() < 0.5 else " (Applause)"
    if rng.random() < 0.2:
        text = "“" + text + "”"
    return text


def asr(words):
    """Noisy lower-case recognition of a word list."""
    out = []
    for w in words:
        r = rng.random()
        if r < 0.05:
            continue
        if r < 0.12:
            out.append(rng.choice(NOUNS + ADJS))
        else:
            out.append(w)
        if rng.random() < 0.03:
            out.append(rng.choice(OTHER))
    return out


def write(name, lines):
    with open(os.path.join(HERE, name), "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")


def main():
    ctm, ref_raw, src_raw = [], [], []
    for talk in range(3):
        rec = f"talk{talk + 1}"
        t = 0.37
        for s in range(14):
            words = sentence(long=(s == 6))
            src_raw.append(raw_text(words, "en"))
            ref_raw.append(raw_text(words, "pt"))
            for i, w in enumerate(asr(words)):
                dur = round(rng.uniform(0.12, 0.45), 2)
                ctm.append(f"{rec} 1 {t:.2f} {dur:.2f} {w} {rng.uniform(0.6, 1.0):.2f}")
                gap = rng.uniform(0.02, 0.12) if rng.random() < 0.85 else rng.uniform(0.17, 0.3)
                t += dur + gap
            t += rng.uniform(0.4, 1.5)
    write("eval.ctm", ctm)
    write("eval.pt.raw", ref_raw)
    write("eval.en.raw", src_raw)

    for name, n in (("talks", 60), ("howto", 45)):
        src, tgt, frames = [], [], []
        for _ in range(n):
            words = sentence(long=rng.random() < 0.1)
            src.append(raw_text(words, "en"))
            tgt.append(raw_text(words, "pt"))
            frames.append(str(int(len(words) * rng.uniform(28, 45)) + rng.choice([0, 0, 0, 2600])))
        write(f"{name}.src", src)
        write(f"{name}.tgt", tgt)
        write(f"{name}.frames", frames)


if __name__ == "__main__":
    main()
