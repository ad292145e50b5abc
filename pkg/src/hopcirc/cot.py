"""Next-token model on top of a Hopfield decoder stack, and chain-of-thought generation."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .fp import FpFlags, FpMatrix, FpNum, fp_add, matmul, round_p, softmax_cols
from .hopfield import (FNN, HopfieldLayerParams, Identity, NetworkSpec, mhn_forward)
from .kernel import khn_forward
from .netspec import matrix_from_json, matrix_to_json, spec_from_dict, spec_to_dict
from .problems.instance import ProblemInstance
from .problems.rng import SplitMix64

__all__ = ["MhmParams", "StepResult", "WordProblemResult", "embed", "mhm_step",
           "cot_generate", "run_word_problem", "random_params", "constant_params",
           "load_params", "dump_params", "params_to_dict", "params_from_dict",
           "YES", "NO"]

YES = "yes"
NO = "no"


@dataclass(frozen=True)
class MhmParams:
    """Token table (|V| x d), position table (n_max x d), output map (|V| x d), decoder."""

    vocab: tuple[str, ...]
    token_emb: FpMatrix
    pos_emb: FpMatrix
    output: FpMatrix
    network: NetworkSpec

    def __post_init__(self) -> None:
        object.__setattr__(self, "vocab", tuple(self.vocab))
        v, d = len(self.vocab), self.network.d
        if len(set(self.vocab)) != v:
            raise ValueError("vocabulary has duplicate tokens")
        if self.token_emb.shape != (v, d):
            raise ValueError(f"token table must be {v}x{d}, got {self.token_emb.shape}")
        if self.pos_emb.cols != d:
            raise ValueError(f"position table must have {d} columns")
        if self.output.shape != (v, d):
            raise ValueError(f"output map must be {v}x{d}, got {self.output.shape}")
        if self.n_max < 2:
            raise ValueError("n_max must be at least 2")
        if self.network.stored_patterns is not None:
            raise ValueError("the decoder runs in self-attention form (no stored patterns)")
        if len({m.p for m in (self.token_emb, self.pos_emb, self.output)} | {self.network.p}) != 1:
            raise ValueError("all parameters must share one precision")

    @property
    def n_max(self) -> int:
        return self.pos_emb.rows

    @property
    def d(self) -> int:
        return self.network.d

    @property
    def p(self) -> int:
        return self.network.p

    def index(self, token: str) -> int:
        try:
            return self.vocab.index(token)
        except ValueError:
            raise ValueError(f"unknown token {token!r}") from None


@dataclass(frozen=True)
class StepResult:
    distribution: FpMatrix
    next: str


@dataclass(frozen=True)
class WordProblemResult:
    answer: Optional[bool]
    trace: tuple[str, ...]

    @property
    def abstained(self) -> bool:
        return self.answer is None


def embed(tokens: Sequence[str], params: MhmParams,
          flags: Optional[FpFlags] = None) -> FpMatrix:
    """Row i is the token embedding of ``tokens[i]`` plus position embedding i."""
    n = len(tokens)
    if n == 0:
        raise ValueError("empty input")
    if n > params.n_max:
        raise ValueError(f"input length {n} exceeds n_max={params.n_max}")
    rows = []
    for i, tok in enumerate(tokens):
        te = params.token_emb.row(params.index(tok))
        pe = params.pos_emb.row(i)
        rows.append([fp_add(a, b, flags) for a, b in zip(te, pe)])
    return FpMatrix.from_rows(rows, params.p)


def _argmax(values: Sequence[FpNum]) -> int:
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def mhm_step(tokens: Sequence[str], params: MhmParams,
             flags: Optional[FpFlags] = None) -> StepResult:
    """Decoder forward pass; softmax over the vocabulary at the last position."""
    X = embed(tokens, params, flags)
    forward = khn_forward if params.network.kernel else mhn_forward
    H = forward(X, params.network, flags)
    h = FpMatrix.column(H.row(H.rows - 1))
    logits = matmul(params.output, h, flags)
    dist = softmax_cols(logits, FpNum.one(params.p), flags)
    return StepResult(dist, params.vocab[_argmax(dist.entries)])


StepFn = Callable[[Sequence[str], MhmParams], StepResult]


def cot_generate(tokens: Sequence[str], params: MhmParams, steps: int,
                 step_fn: Optional[StepFn] = None) -> list[str]:
    """Append the model's prediction ``steps`` times; return the generated tokens.

    One forward pass per step. ``step_fn`` replaces :func:`mhm_step`
    (useful for counting calls).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if len(tokens) + steps > params.n_max - 1:
        raise ValueError(f"length budget exceeded: {len(tokens)} + {steps} > n_max - 1 "
                         f"= {params.n_max - 1}")
    step = step_fn or mhm_step
    seq = list(tokens)
    out = []
    for _ in range(steps):
        nxt = step(seq, params).next
        seq.append(nxt)
        out.append(nxt)
    return out


def run_word_problem(instance: ProblemInstance, params: MhmParams,
                     cot_steps: int = 1) -> WordProblemResult:
    """Feed an S5 word, generate ``cot_steps`` tokens, read the last as yes/no."""
    if instance.kind != "s5_word":
        raise ValueError(f"expected an s5_word instance, got {instance.kind!r}")
    missing = (set(instance.tokens) | {YES, NO}) - set(params.vocab)
    if missing:
        raise ValueError(f"vocabulary lacks tokens {sorted(missing)}")
    trace = cot_generate(instance.tokens, params, cot_steps)
    last = trace[-1]
    answer = True if last == YES else False if last == NO else None
    return WordProblemResult(answer, tuple(trace))


# parameter construction -----------------------------------------------------

def _rand_matrix(rng: SplitMix64, rows: int, cols: int, p: int, scale: float) -> FpMatrix:
    vals = []
    for _ in range(rows * cols):
        u = Fraction(rng.below(1 << 20), 1 << 20) * 2 - 1
        vals.append(round_p(u * Fraction(scale), p))
    return FpMatrix(rows, cols, tuple(vals), p)


def random_params(vocab: Sequence[str], d: int, n_max: int, layers: int, p: int,
                  seed: int, answer_rows: bool = False) -> MhmParams:
    """Random weights, uniform in [-1, 1) scaled by 1/sqrt(d)-ish factors.

    With ``answer_rows`` only the ``yes``/``no`` rows of the output map are
    nonzero and ``no`` is the negation of ``yes``, so the argmax is one of the
    two answers whenever the logit is nonzero.
    """
    rng = SplitMix64(seed)
    v = len(vocab)
    scale = 1.0 / max(1, d) ** 0.5
    lays, comps = [], [Identity()]
    for _ in range(layers):
        lays.append(HopfieldLayerParams(
            _rand_matrix(rng, d, d, p, 1.0), _rand_matrix(rng, d, d, p, 1.0),
            _rand_matrix(rng, d, d, p, scale), FpNum.one(p), "softmax"))
        comps.append(FNN(_rand_matrix(rng, d, d, p, scale), _rand_matrix(rng, d, d, p, scale),
                         _rand_matrix(rng, d, 1, p, 0.5), _rand_matrix(rng, d, 1, p, 0.5)))
    net = NetworkSpec(tuple(lays), tuple(comps))
    tok = _rand_matrix(rng, v, d, p, 1.0)
    pos = _rand_matrix(rng, n_max, d, p, 0.5)
    out = _rand_matrix(rng, v, d, p, 2.0)
    if answer_rows:
        if YES not in vocab or NO not in vocab:
            raise ValueError("answer_rows needs 'yes' and 'no' in the vocabulary")
        y, n = list(vocab).index(YES), list(vocab).index(NO)
        rows = [[FpNum.zero(p)] * d for _ in range(v)]
        rows[y] = list(out.row(y))
        rows[n] = [-x for x in out.row(y)]
        out = FpMatrix.from_rows(rows, p)
    return MhmParams(tuple(vocab), tok, pos, out, net)


def constant_params(vocab: Sequence[str], token: str, d: int, n_max: int, p: int,
                    layers: int = 1) -> MhmParams:
    """A network whose prediction is ``token`` on every input.

    Each FNN has zero weights and bias ``b_2 = e_1``, so every hidden state
    ends as ``e_1``; the output row of ``token`` is ``8 e_1`` and all others
    are zero.
    """
    v = len(vocab)
    if token not in vocab:
        raise ValueError(f"{token!r} is not in the vocabulary")
    one, zero = FpNum.one(p), FpNum.zero(p)
    eye = FpMatrix.identity(d, p)
    zeros = FpMatrix.zeros(d, d, p)
    e1 = FpMatrix.column([one] + [zero] * (d - 1))
    fnn = FNN(zeros, zeros, FpMatrix.zeros(d, 1, p), e1)
    lays = [HopfieldLayerParams(eye, eye, eye, one, "softmax") for _ in range(layers)]
    net = NetworkSpec(tuple(lays), (Identity(),) + (fnn,) * layers)
    rows = [[zero] * d for _ in range(v)]
    rows[list(vocab).index(token)][0] = FpNum(1 << (p - 1), 4 - p, p)
    return MhmParams(tuple(vocab), FpMatrix.zeros(v, d, p), FpMatrix.zeros(n_max, d, p),
                     FpMatrix.from_rows(rows, p), net)


# files ----------------------------------------------------------------------

def params_to_dict(params: MhmParams) -> dict:
    return {"vocab": list(params.vocab), "n_max": params.n_max,
            "token_emb": matrix_to_json(params.token_emb),
            "pos_emb": matrix_to_json(params.pos_emb),
            "output": matrix_to_json(params.output),
            "network": spec_to_dict(params.network)}


def params_from_dict(data: dict, base: Optional[Path] = None) -> MhmParams:
    net = spec_from_dict(data["network"], base)
    p = net.p
    params = MhmParams(tuple(data["vocab"]), matrix_from_json(data["token_emb"], p, base),
                       matrix_from_json(data["pos_emb"], p, base),
                       matrix_from_json(data["output"], p, base), net)
    if "n_max" in data and int(data["n_max"]) != params.n_max:
        raise ValueError("n_max does not match the position table")
    return params


def load_params(path: Union[str, Path]) -> MhmParams:
    path = Path(path)
    return params_from_dict(json.loads(path.read_text()), path.parent)


def dump_params(params: MhmParams, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(params_to_dict(params), indent=1) + "\n")
