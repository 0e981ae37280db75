"""Token vocabularies for the source (program Y goal) and target (rule line)
sides.  Index 0 is padding so embedding layers can mask it."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)
PAD_ID, BOS_ID, EOS_ID, UNK_ID = range(4)


class Vocab:
    """Immutable token table with the four specials at fixed indices."""

    def __init__(self, tokens: Iterable[str]):
        body = sorted(set(tokens) - set(SPECIALS))
        self.tokens: tuple[str, ...] = SPECIALS + tuple(body)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Vocab":
        seen: set[str] = set()
        for line in lines:
            seen.update(line.split())
        return cls(seen)

    def encode(self, tokens: Sequence[str], *, bos: bool = False,
               eos: bool = False) -> list[int]:
        ids = [self.index.get(t, UNK_ID) for t in tokens]
        if bos:
            ids.insert(0, BOS_ID)
        if eos:
            ids.append(EOS_ID)
        return ids

    def decode(self, ids: Sequence[int]) -> list[str]:
        """Tokens up to the first EOS, specials dropped."""
        out: list[str] = []
        for i in ids:
            if i == EOS_ID:
                break
            if i in (PAD_ID, BOS_ID, UNK_ID):
                continue
            out.append(self.tokens[i])
        return out

    def unknown_tokens(self, lines: Iterable[str]) -> set[str]:
        missing: set[str] = set()
        for line in lines:
            missing.update(t for t in line.split() if t not in self.index)
        return missing

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(list(self.tokens), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "Vocab":
        tokens = json.loads(Path(path).read_text())
        vocab = cls(tokens)
        if vocab.tokens != tuple(tokens):
            raise ValueError(f"vocabulary file {path} is not in canonical order")
        return vocab
