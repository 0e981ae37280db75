"""Beam decoding: top-k rule lines with total log probabilities, best first."""
from __future__ import annotations

import torch

from neuralpolicy.model import Seq2SeqTransformer
from neuralpolicy.vocab import Vocab, BOS_ID, EOS_ID, PAD_ID, UNK_ID


@torch.no_grad()
def beam_decode(model: Seq2SeqTransformer, src_ids: list[int],
                tgt_vocab: Vocab, beam: int) -> list[tuple[str, float]]:
    """Decode up to `beam` distinct target lines for one source.

    Returns (line, log_prob) sorted by log_prob descending.  Lines that
    decode to nothing (immediate EOS) are dropped.
    """
    if beam <= 0:
        return []
    model.eval()
    src = torch.tensor([src_ids], dtype=torch.long)
    memory = model.encode(src)
    max_len = model.cfg.max_tgt_len

    # (ids, score, done); scores are summed token log-probs, no length norm
    # since every target is a short fixed-shape rule line
    live: list[tuple[list[int], float, bool]] = [([BOS_ID], 0.0, False)]
    for _ in range(max_len - 1):
        if all(done for _, _, done in live):
            break
        expanded: list[tuple[list[int], float, bool]] = []
        for ids, score, done in live:
            if done:
                expanded.append((ids, score, True))
                continue
            tgt_in = torch.tensor([ids], dtype=torch.long)
            logits = model.decode_logits(memory, src, tgt_in)[0]
            logits[PAD_ID] = float("-inf")
            logits[BOS_ID] = float("-inf")
            logits[UNK_ID] = float("-inf")
            logp = torch.log_softmax(logits, dim=-1)
            top = torch.topk(logp, min(beam, logp.size(0)))
            for tok_logp, tok in zip(top.values.tolist(), top.indices.tolist()):
                expanded.append((ids + [tok], score + tok_logp, tok == EOS_ID))
        expanded.sort(key=lambda t: -t[1])
        live = expanded[:beam]

    out: list[tuple[str, float]] = []
    for ids, score, _ in live:
        tokens = tgt_vocab.decode(ids)
        if tokens:
            out.append((" ".join(tokens), score))
    out.sort(key=lambda t: -t[1])
    return out[:beam]
