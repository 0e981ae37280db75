"""Toy neural policy: a small transformer that maps a (program, goal) token
line to ranked rewrite-rule lines, trained on exported step files and served
over the line-JSON policy bridge."""

from neuralpolicy.vocab import Vocab, PAD, BOS, EOS, UNK
from neuralpolicy.model import ModelConfig, Seq2SeqTransformer
from neuralpolicy.train import TrainResult, VocabMismatchError, train_model
from neuralpolicy.beam import beam_decode
from neuralpolicy.serve import serve

__all__ = [
    "Vocab", "PAD", "BOS", "EOS", "UNK",
    "ModelConfig", "Seq2SeqTransformer",
    "TrainResult", "VocabMismatchError", "train_model",
    "beam_decode", "serve",
]
