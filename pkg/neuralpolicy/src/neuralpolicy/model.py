"""A deliberately small encoder-decoder transformer.

The full-scale reference system uses an 8-layer model trained for hundreds of
thousands of steps; this one is sized to overfit a few thousand short step
samples on a CPU in minutes.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional

import torch
from torch import nn

from neuralpolicy.vocab import PAD_ID


@dataclass(frozen=True)
class ModelConfig:
    layers: int = 2
    heads: int = 2
    hidden: int = 64
    feedforward: int = 128
    dropout: float = 0.1
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    batch_size: int = 64
    max_src_len: int = 256
    max_tgt_len: int = 8
    # optional pinned vocabularies; default is to derive them from the data
    src_vocab_file: Optional[str] = None
    tgt_vocab_file: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown model config keys: {sorted(bad)}")
        return cls(**d)


class Seq2SeqTransformer(nn.Module):
    def __init__(self, cfg: ModelConfig, src_vocab_size: int,
                 tgt_vocab_size: int):
        super().__init__()
        self.cfg = cfg
        d = cfg.hidden
        self.src_embed = nn.Embedding(src_vocab_size, d, padding_idx=PAD_ID)
        self.tgt_embed = nn.Embedding(tgt_vocab_size, d, padding_idx=PAD_ID)
        self.src_pos = nn.Embedding(cfg.max_src_len, d)
        self.tgt_pos = nn.Embedding(cfg.max_tgt_len, d)
        self.transformer = nn.Transformer(
            d_model=d, nhead=cfg.heads,
            num_encoder_layers=cfg.layers, num_decoder_layers=cfg.layers,
            dim_feedforward=cfg.feedforward, dropout=cfg.dropout,
            batch_first=True)
        # the nested-tensor inference fast path warns on every padded batch
        # and adds nothing at this scale
        self.transformer.encoder.enable_nested_tensor = False
        self.transformer.encoder.use_nested_tensor = False
        self.out = nn.Linear(d, tgt_vocab_size)

    def _embed_src(self, src: torch.Tensor) -> torch.Tensor:
        pos = torch.arange(src.size(1), device=src.device)
        return self.src_embed(src) + self.src_pos(pos)[None, :, :]

    def _embed_tgt(self, tgt: torch.Tensor) -> torch.Tensor:
        pos = torch.arange(tgt.size(1), device=tgt.device)
        return self.tgt_embed(tgt) + self.tgt_pos(pos)[None, :, :]

    @staticmethod
    def _causal_mask(n: int, device) -> torch.Tensor:
        # bool to match the key-padding masks; True = blocked
        return torch.triu(torch.ones(n, n, dtype=torch.bool, device=device),
                          diagonal=1)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        """Logits over the target vocabulary for each tgt_in position.

        src: (batch, src_len) ids; tgt_in: (batch, tgt_len) ids starting
        with BOS.  Padding is masked on both sides; the decoder is causal.
        """
        causal = self._causal_mask(tgt_in.size(1), tgt_in.device)
        hidden = self.transformer(
            self._embed_src(src), self._embed_tgt(tgt_in),
            tgt_mask=causal,
            src_key_padding_mask=src == PAD_ID,
            tgt_key_padding_mask=tgt_in == PAD_ID,
            memory_key_padding_mask=src == PAD_ID)
        return self.out(hidden)

    def encode(self, src: torch.Tensor) -> torch.Tensor:
        return self.transformer.encoder(
            self._embed_src(src), src_key_padding_mask=src == PAD_ID)

    def decode_logits(self, memory: torch.Tensor, src: torch.Tensor,
                      tgt_in: torch.Tensor) -> torch.Tensor:
        """Next-token logits (batch, vocab) for the last position of tgt_in."""
        causal = self._causal_mask(tgt_in.size(1), tgt_in.device)
        hidden = self.transformer.decoder(
            self._embed_tgt(tgt_in), memory, tgt_mask=causal,
            memory_key_padding_mask=src == PAD_ID)
        return self.out(hidden[:, -1, :])
