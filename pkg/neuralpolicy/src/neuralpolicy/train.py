"""Training loop: maximize the conditional probability of the target rule
line given the source line, with teacher forcing and Adam."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import torch
from torch import nn

from neuralpolicy import alphabet
from neuralpolicy.model import ModelConfig, Seq2SeqTransformer
from neuralpolicy.vocab import Vocab, PAD_ID

logger = logging.getLogger(__name__)


class VocabMismatchError(ValueError):
    """Training data contains tokens outside the pinned vocabulary."""


@dataclass(frozen=True)
class TrainResult:
    checkpoint_path: str
    loss_curve: tuple[float, ...]
    epochs_done: int
    src_vocab_size: int
    tgt_vocab_size: int


def read_lines(path) -> list[str]:
    return [l for l in Path(path).read_text().splitlines() if l.strip()]


def _pad_batchable(rows: list[list[int]], width: int) -> torch.Tensor:
    out = torch.full((len(rows), width), PAD_ID, dtype=torch.long)
    for i, row in enumerate(rows):
        out[i, :len(row)] = torch.tensor(row, dtype=torch.long)
    return out


def encode_dataset(src_lines: list[str], tgt_lines: list[str],
                   src_vocab: Vocab, tgt_vocab: Vocab, cfg: ModelConfig
                   ) -> tuple[torch.Tensor, torch.Tensor]:
    if len(src_lines) != len(tgt_lines):
        raise ValueError(
            f"source/target length mismatch: {len(src_lines)} vs {len(tgt_lines)}")
    srcs = [src_vocab.encode(l.split()[:cfg.max_src_len]) for l in src_lines]
    # BOS + tokens + EOS, clipped to the decoder window
    tgts = [tgt_vocab.encode(l.split()[:cfg.max_tgt_len - 2], bos=True, eos=True)
            for l in tgt_lines]
    src_w = max(len(r) for r in srcs)
    tgt_w = max(len(r) for r in tgts)
    return _pad_batchable(srcs, src_w), _pad_batchable(tgts, tgt_w)


def _load_checkpoint(path) -> dict:
    return torch.load(path, map_location="cpu", weights_only=False)


def build_from_checkpoint(ckpt: dict) -> tuple[Seq2SeqTransformer, Vocab, Vocab,
                                               ModelConfig]:
    cfg = ModelConfig.from_dict(ckpt["config"])
    src_vocab = Vocab(ckpt["src_vocab"])
    tgt_vocab = Vocab(ckpt["tgt_vocab"])
    model = Seq2SeqTransformer(cfg, len(src_vocab), len(tgt_vocab))
    model.load_state_dict(ckpt["model_state"])
    return model, src_vocab, tgt_vocab, cfg


def _resolve_vocabs(src_lines, tgt_lines, cfg: ModelConfig,
                    resume_ckpt: Optional[dict]) -> tuple[Vocab, Vocab]:
    """Vocabularies are always pinned: from the resumed checkpoint, from
    explicit vocab files, or from the fixed protocol alphabets."""
    if resume_ckpt is not None:
        src_vocab = Vocab(resume_ckpt["src_vocab"])
        tgt_vocab = Vocab(resume_ckpt["tgt_vocab"])
    else:
        src_vocab = (Vocab.load(cfg.src_vocab_file) if cfg.src_vocab_file
                     else Vocab(alphabet.source_alphabet()))
        tgt_vocab = (Vocab.load(cfg.tgt_vocab_file) if cfg.tgt_vocab_file
                     else Vocab(alphabet.target_alphabet()))
    missing = (src_vocab.unknown_tokens(src_lines)
               | tgt_vocab.unknown_tokens(tgt_lines))
    if missing:
        raise VocabMismatchError(
            "training data has tokens outside the pinned vocabulary: "
            f"{sorted(missing)[:10]}")
    return src_vocab, tgt_vocab


_ARCH_KEYS = frozenset(
    {"layers", "heads", "hidden", "feedforward", "max_src_len", "max_tgt_len"})


def train_model(src_file, tgt_file, out_path, cfg: ModelConfig = ModelConfig(),
                epochs: int = 10, seed: int = 0,
                resume: Optional[str] = None,
                overrides: Optional[dict] = None) -> TrainResult:
    """Train (or continue training) and write a checkpoint.

    Deterministic for a fixed seed and input files on a fixed platform;
    resuming from epoch k replays the same batch order epochs k+1.. as an
    uninterrupted run would have used.  When resuming, `cfg` is replaced by
    the checkpoint's config; `overrides` (e.g. a lower learning rate for
    fine-tuning) apply on top in both cases but may not change architecture.
    """
    src_lines, tgt_lines = read_lines(src_file), read_lines(tgt_file)
    if not src_lines:
        raise ValueError(f"no training lines in {src_file}")

    resume_ckpt = _load_checkpoint(resume) if resume else None
    if resume_ckpt is not None:
        cfg = ModelConfig.from_dict(resume_ckpt["config"])
        if overrides and _ARCH_KEYS & set(overrides):
            raise ValueError(
                "cannot change architecture when resuming: "
                f"{sorted(_ARCH_KEYS & set(overrides))}")
    if overrides:
        cfg = ModelConfig.from_dict({**cfg.to_dict(), **overrides})
    src_vocab, tgt_vocab = _resolve_vocabs(src_lines, tgt_lines, cfg, resume_ckpt)

    torch.manual_seed(seed)
    model = Seq2SeqTransformer(cfg, len(src_vocab), len(tgt_vocab))
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate,
                                 weight_decay=cfg.weight_decay)
    loss_curve: list[float] = []
    start_epoch = 0
    if resume_ckpt is not None:
        model.load_state_dict(resume_ckpt["model_state"])
        optimizer.load_state_dict(resume_ckpt["optimizer_state"])
        # the loaded param groups carry the old hyperparameters
        for group in optimizer.param_groups:
            group["lr"] = cfg.learning_rate
            group["weight_decay"] = cfg.weight_decay
        loss_curve = list(resume_ckpt["loss_curve"])
        start_epoch = resume_ckpt["epochs_done"]

    src, tgt = encode_dataset(src_lines, tgt_lines, src_vocab, tgt_vocab, cfg)
    criterion = nn.CrossEntropyLoss(ignore_index=PAD_ID)

    model.train()
    n = src.size(0)
    for epoch in range(start_epoch, start_epoch + epochs):
        gen = torch.Generator().manual_seed(hash((seed, epoch)) & 0x7FFFFFFF)
        order = torch.randperm(n, generator=gen)
        total, batches = 0.0, 0
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo:lo + cfg.batch_size]
            bs, bt = src[idx], tgt[idx]
            try:
                logits = model(bs, bt[:, :-1])
                loss = criterion(logits.reshape(-1, logits.size(-1)),
                                 bt[:, 1:].reshape(-1))
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
            except RuntimeError as e:
                if "out of memory" in str(e).lower():
                    raise RuntimeError(
                        f"{e}; reduce batch_size (now {cfg.batch_size}) or "
                        f"hidden (now {cfg.hidden})") from e
                raise
            total += loss.item()
            batches += 1
        loss_curve.append(total / batches)
        logger.info("epoch %d loss %.4f", epoch + 1, loss_curve[-1])

    ckpt = {
        "config": cfg.to_dict(),
        "src_vocab": list(src_vocab.tokens),
        "tgt_vocab": list(tgt_vocab.tokens),
        "model_state": model.state_dict(),
        "optimizer_state": optimizer.state_dict(),
        "loss_curve": loss_curve,
        "epochs_done": start_epoch + epochs,
        "seed": seed,
    }
    torch.save(ckpt, out_path)
    return TrainResult(str(out_path), tuple(loss_curve), start_epoch + epochs,
                       len(src_vocab), len(tgt_vocab))
