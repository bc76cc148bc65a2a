"""The four embedding models: CBOW, SkipGram, charCBOW, charSkipGram.

All variants train with negative sampling. The char* variants enrich the
plain models with character-component embeddings:

* charCBOW concatenates, per context slot, the context token vector and
  its component vectors into one wide vector (absent slots near sentence
  edges contribute zero blocks), and scores that against per-token output
  rows of matching width. The fixed positional layout is what lets the
  model treat the radical differently from later components.
* charSkipGram predicts, from the center token's vector, each context
  token and each of that token's components as independent negative
  sampling tasks; component targets are scored against a separate
  component output table with its own noise distribution.

Every step function is a pure deterministic function of its inputs once
the rng is seeded. Gradients are exact for the negative-sampling loss;
``loss_and_grads`` exposes them per touched row so they can be checked
against finite differences.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .corpus import Vocabulary
from .lexicon import ComponentLexicon

VARIANTS = ("cbow", "skipgram", "charcbow", "charskipgram")

# Attempts to redraw a negative that collided with the target before the
# slot is skipped.
MAX_COLLISION_RESAMPLES = 8


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters shared by all model variants.

    ``K`` embedding dimension, ``T`` context window radius, ``M``
    components kept per character, ``negatives`` noise samples per
    positive. ``gram`` selects uni- or bi-character tokens; bi tokens
    carry the components of both characters, so the per-token component
    count is ``L_c = M`` (uni) or ``2M`` (bi).
    """

    variant: str
    gram: str = "uni"
    K: int = 50
    T: int = 2
    M: int = 2
    negatives: int = 5
    cbow_combine: str = "average"  # average | sum

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.gram not in ("uni", "bi"):
            raise ValueError(f"gram must be 'uni' or 'bi', got {self.gram!r}")
        if self.cbow_combine not in ("average", "sum"):
            raise ValueError(f"cbow_combine must be 'average' or 'sum'")
        for name in ("K", "T", "M", "negatives"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")

    @property
    def L_c(self) -> int:
        return self.M if self.gram == "uni" else 2 * self.M

    @property
    def uses_components(self) -> bool:
        return self.variant in ("charcbow", "charskipgram")

    @property
    def output_width(self) -> int:
        """Row width of the token output table."""
        if self.variant == "charcbow":
            return 2 * self.T * (1 + self.L_c) * self.K
        return self.K


@dataclass(frozen=True)
class TrainingExample:
    """One center position: the center token id plus 2T context slots.

    ``context`` is ordered -T..-1, +1..+T; a slot is None past the
    sentence edge, otherwise ``(token_id, component_ids)`` where
    ``component_ids`` is a length-L_c tuple (empty for plain variants).
    """

    center: int
    context: tuple

    def present_slots(self):
        return [(s, tc[0], tc[1]) for s, tc in enumerate(self.context) if tc is not None]


@dataclass
class EmbeddingTables:
    """Dense parameter tables; rows are updated in place by SGD.

    ``char_in`` holds the token vectors that become the learned
    embeddings. ``char_out`` rows are K wide except for charCBOW where
    each row spans the full concatenated context layout. Component tables
    are None for the plain variants.
    """

    char_in: np.ndarray
    char_out: np.ndarray
    comp_in: np.ndarray | None = None
    comp_out: np.ndarray | None = None

    def named(self):
        for name in ("char_in", "char_out", "comp_in", "comp_out"):
            arr = getattr(self, name)
            if arr is not None:
                yield name, arr

    def all_finite(self) -> bool:
        return all(np.isfinite(arr).all() for _, arr in self.named())


def init_tables(config: ModelConfig, vocab_size: int, comp_size: int,
                rng: np.random.Generator) -> EmbeddingTables:
    """Uniform [-0.5/K, 0.5/K] input tables, zero output tables.

    Zero output rows make the very first losses exactly
    (1 + negatives) * ln 2 per prediction, a handy smoke check.
    """
    k = config.K
    bound = 0.5 / k
    char_in = rng.uniform(-bound, bound, (vocab_size, k))
    comp_in = None
    comp_out = None
    if config.uses_components:
        if comp_size < 1:
            raise ValueError("component vocabulary required for char* variants")
        comp_in = rng.uniform(-bound, bound, (comp_size, k))
        if config.variant == "charskipgram":
            comp_out = np.zeros((comp_size, k))
    char_out = np.zeros((vocab_size, config.output_width))
    return EmbeddingTables(char_in=char_in, char_out=char_out,
                           comp_in=comp_in, comp_out=comp_out)


def token_components(token: str, gram: str, lexicon: ComponentLexicon, m: int) -> tuple[str, ...]:
    """Component identifiers for a token, length M (uni) or 2M (bi).

    Bi tokens concatenate the two characters' lists, radical first within
    each half.
    """
    if gram == "uni":
        return lexicon.components_of(token, m)
    if gram == "bi":
        if len(token) != 2:
            raise ValueError(f"bi token must have two characters, got {token!r}")
        return lexicon.components_of(token[0], m) + lexicon.components_of(token[1], m)
    raise ValueError(f"gram must be 'uni' or 'bi', got {gram!r}")


@dataclass(frozen=True)
class ComponentVocab:
    """Component <-> id mapping plus per-token component rows.

    ``token_comps[tid]`` are the component ids of vocabulary token
    ``tid`` (length L_c). Counts weight each component by the corpus
    frequency of the tokens carrying it, and feed the component noise
    distribution used by charSkipGram.
    """

    id_to_comp: tuple[str, ...]
    comp_to_id: dict[str, int]
    counts: np.ndarray
    ns_cum: np.ndarray
    token_comps: np.ndarray

    def __len__(self) -> int:
        return len(self.id_to_comp)

    @classmethod
    def build(cls, vocab: Vocabulary, lexicon: ComponentLexicon, gram: str,
              m: int, ns_exponent: float = 0.75) -> "ComponentVocab":
        per_token = [token_components(tok, gram, lexicon, m) for tok in vocab.id_to_token]
        counter: Counter = Counter()
        for comps, cnt in zip(per_token, vocab.counts):
            for comp in comps:
                counter[comp] += int(cnt)
        ordered = sorted(counter, key=lambda c: (-counter[c], c))
        comp_to_id = {c: i for i, c in enumerate(ordered)}
        counts = np.array([counter[c] for c in ordered], dtype=np.int64)
        weights = counts.astype(np.float64) ** ns_exponent
        probs = weights / weights.sum()
        token_comps = np.array(
            [[comp_to_id[c] for c in comps] for comps in per_token], dtype=np.int64
        )
        return cls(id_to_comp=tuple(ordered), comp_to_id=comp_to_id, counts=counts,
                   ns_cum=np.cumsum(probs), token_comps=token_comps)


@dataclass(frozen=True)
class Noise:
    """Cumulative noise distributions for negative draws."""

    char_cum: np.ndarray
    comp_cum: np.ndarray | None = None


def make_noise(vocab: Vocabulary, comp_vocab: ComponentVocab | None = None) -> Noise:
    return Noise(char_cum=vocab.ns_cum,
                 comp_cum=None if comp_vocab is None else comp_vocab.ns_cum)


def _draw_avoiding(cum: np.ndarray, n: int, exclude: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Draw n ids from the cumulative distribution, avoiding ``exclude``.

    A draw that collides with the target is redrawn a bounded number of
    times and then dropped, so the result may have fewer than n entries.
    """
    top = len(cum) - 1
    draws = np.minimum(np.searchsorted(cum, rng.random(n), side="right"), top)
    out = []
    for d in draws:
        tries = 0
        while d == exclude and tries < MAX_COLLISION_RESAMPLES:
            d = min(np.searchsorted(cum, rng.random(), side="right"), top)
            tries += 1
        if d != exclude:
            out.append(int(d))
    return np.array(out, dtype=np.int64)


def draw_negatives(example: TrainingExample, config: ModelConfig, noise: Noise,
                   rng: np.random.Generator):
    """Draw the variant-appropriate negative-sample structure for one example.

    cbow/charcbow: one id array (targets the center). skipgram: a list of
    (slot, ids) over present slots. charskipgram: a list of
    (slot, char_ids, [component id arrays]) over present slots.
    """
    n = config.negatives
    if config.variant in ("cbow", "charcbow"):
        return _draw_avoiding(noise.char_cum, n, example.center, rng)
    if config.variant == "skipgram":
        return [(s, _draw_avoiding(noise.char_cum, n, tok, rng))
                for s, tok, _ in example.present_slots()]
    # charskipgram
    if noise.comp_cum is None:
        raise ValueError("charskipgram requires a component noise distribution")
    drawn = []
    for s, tok, comps in example.present_slots():
        char_negs = _draw_avoiding(noise.char_cum, n, tok, rng)
        comp_negs = [_draw_avoiding(noise.comp_cum, n, c, rng) for c in comps]
        drawn.append((s, char_negs, comp_negs))
    return drawn


def _ns_terms(v: np.ndarray, target: int, negatives: np.ndarray, out_table: np.ndarray):
    """Loss and raw gradient pieces for one negative-sampling prediction.

    loss = -log sigma(v.o_target) - sum log sigma(-v.o_neg), computed in
    log1p form for stability. Returns (loss, dloss/dv, touched row ids,
    per-row scalar coefficients); the gradient of row i is coef[i] * v.
    """
    rows = np.empty(1 + len(negatives), dtype=np.int64)
    rows[0] = target
    rows[1:] = negatives
    out_rows = out_table[rows]
    prod = out_rows @ v
    loss = float(np.logaddexp(0.0, -prod[0]) + np.logaddexp(0.0, prod[1:]).sum())
    coef = expit(prod)
    coef[0] -= 1.0
    g_v = coef @ out_rows
    return loss, g_v, rows, coef


def ns_loss_and_grads(v: np.ndarray, target: int, negatives, out_table: np.ndarray):
    """Public form of the core loss: (loss, grad wrt v, {row: grad}) tuples."""
    negatives = np.asarray(negatives, dtype=np.int64)
    loss, g_v, rows, coef = _ns_terms(v, target, negatives, out_table)
    out_grads: dict[int, np.ndarray] = {}
    for r, c in zip(rows, coef):
        _acc(out_grads, int(r), c * v)
    return loss, g_v, out_grads


def _acc(table_grads: dict, row: int, vec: np.ndarray) -> None:
    cur = table_grads.get(row)
    if cur is None:
        table_grads[row] = np.array(vec, dtype=np.float64)
    else:
        cur += vec


def charcbow_context_vector(example: TrainingExample, tables: EmbeddingTables,
                            config: ModelConfig) -> np.ndarray:
    """Concatenated context vector: per slot, token block then component blocks.

    Slots run -T..-1, +1..+T; absent slots stay zero. The radical always
    occupies the first component block of its slot.
    """
    blocks = 1 + config.L_c
    h = np.zeros((2 * config.T, blocks, config.K))
    for s, tok, comps in example.present_slots():
        h[s, 0] = tables.char_in[tok]
        for m, cid in enumerate(comps):
            h[s, 1 + m] = tables.comp_in[cid]
    flat = h.reshape(-1)
    if flat.shape[0] != tables.char_out.shape[1]:
        raise AssertionError(
            f"context vector length {flat.shape[0]} != output row width "
            f"{tables.char_out.shape[1]}"
        )
    return flat


def loss_and_grads(example: TrainingExample, negatives, tables: EmbeddingTables,
                   config: ModelConfig):
    """Per-example loss and exact gradients for every touched row.

    ``negatives`` must come from :func:`draw_negatives` (or be built by
    hand with the same structure). Returns (loss, grads) where grads maps
    table name -> {row id: gradient vector}.
    """
    grads: dict[str, dict[int, np.ndarray]] = {
        "char_in": {}, "char_out": {}, "comp_in": {}, "comp_out": {},
    }
    variant = config.variant
    present = example.present_slots()

    if variant == "charcbow":
        h = charcbow_context_vector(example, tables, config)
        loss, g_h, rows, coef = _ns_terms(h, example.center, negatives, tables.char_out)
        for r, c in zip(rows, coef):
            _acc(grads["char_out"], int(r), c * h)
        g3 = g_h.reshape(2 * config.T, 1 + config.L_c, config.K)
        for s, tok, comps in present:
            _acc(grads["char_in"], tok, g3[s, 0])
            for m, cid in enumerate(comps):
                _acc(grads["comp_in"], cid, g3[s, 1 + m])
        return loss, grads

    if variant == "cbow":
        if not present:
            return 0.0, grads
        toks = [tok for _, tok, _ in present]
        v = tables.char_in[toks].sum(axis=0)
        if config.cbow_combine == "average":
            v /= len(toks)
        loss, g_v, rows, coef = _ns_terms(v, example.center, negatives, tables.char_out)
        for r, c in zip(rows, coef):
            _acc(grads["char_out"], int(r), c * v)
        per_tok = g_v / len(toks) if config.cbow_combine == "average" else g_v
        for tok in toks:
            _acc(grads["char_in"], tok, per_tok)
        return loss, grads

    if variant == "skipgram":
        v = tables.char_in[example.center]
        total = 0.0
        g_center = np.zeros(config.K)
        slot_negs = dict((s, negs) for s, negs in negatives)
        for s, tok, _ in present:
            loss, g_v, rows, coef = _ns_terms(v, tok, slot_negs[s], tables.char_out)
            total += loss
            g_center += g_v
            for r, c in zip(rows, coef):
                _acc(grads["char_out"], int(r), c * v)
        if present:
            _acc(grads["char_in"], example.center, g_center)
        return total, grads

    # charskipgram
    v = tables.char_in[example.center]
    total = 0.0
    g_center = np.zeros(config.K)
    slot_negs = dict((s, (cn, compn)) for s, cn, compn in negatives)
    for s, tok, comps in present:
        char_negs, comp_negs = slot_negs[s]
        loss, g_v, rows, coef = _ns_terms(v, tok, char_negs, tables.char_out)
        total += loss
        g_center += g_v
        for r, c in zip(rows, coef):
            _acc(grads["char_out"], int(r), c * v)
        for m, cid in enumerate(comps):
            loss, g_v, rows, coef = _ns_terms(v, cid, comp_negs[m], tables.comp_out)
            total += loss
            g_center += g_v
            for r, c in zip(rows, coef):
                _acc(grads["comp_out"], int(r), c * v)
    if present:
        _acc(grads["char_in"], example.center, g_center)
    return total, grads


def example_loss(example: TrainingExample, negatives, tables: EmbeddingTables,
                 config: ModelConfig) -> float:
    """Loss only; the cheap forward pass used by finite-difference checks."""
    variant = config.variant
    present = example.present_slots()
    if variant == "charcbow":
        h = charcbow_context_vector(example, tables, config)
        return _ns_terms(h, example.center, negatives, tables.char_out)[0]
    if variant == "cbow":
        if not present:
            return 0.0
        toks = [tok for _, tok, _ in present]
        v = tables.char_in[toks].sum(axis=0)
        if config.cbow_combine == "average":
            v /= len(toks)
        return _ns_terms(v, example.center, negatives, tables.char_out)[0]
    if variant == "skipgram":
        v = tables.char_in[example.center]
        slot_negs = dict(negatives)
        return sum(_ns_terms(v, tok, slot_negs[s], tables.char_out)[0]
                   for s, tok, _ in present)
    v = tables.char_in[example.center]
    slot_negs = dict((s, (cn, compn)) for s, cn, compn in negatives)
    total = 0.0
    for s, tok, comps in present:
        char_negs, comp_negs = slot_negs[s]
        total += _ns_terms(v, tok, char_negs, tables.char_out)[0]
        for m, cid in enumerate(comps):
            total += _ns_terms(v, cid, comp_negs[m], tables.comp_out)[0]
    return total


def apply_grads(tables: EmbeddingTables, grads, lr: float) -> None:
    """One SGD step: row -= lr * grad for every touched row."""
    for name, table_grads in grads.items():
        if not table_grads:
            continue
        arr = getattr(tables, name)
        for row, g in table_grads.items():
            arr[row] -= lr * g


def step(example: TrainingExample, tables: EmbeddingTables, config: ModelConfig,
         lr: float, rng: np.random.Generator, noise: Noise) -> float:
    """Draw negatives, update all touched rows at rate ``lr``, return the
    pre-update loss."""
    negatives = draw_negatives(example, config, noise, rng)
    loss, grads = loss_and_grads(example, negatives, tables, config)
    apply_grads(tables, grads, lr)
    return loss


def _variant_step(variant):
    def run(example, tables, config, lr, rng, noise):
        if config.variant != variant:
            raise ValueError(f"config.variant is {config.variant!r}, expected {variant!r}")
        return step(example, tables, config, lr, rng, noise)
    run.__name__ = f"{variant}_step"
    run.__doc__ = step.__doc__
    return run


cbow_step = _variant_step("cbow")
skipgram_step = _variant_step("skipgram")
charcbow_step = _variant_step("charcbow")
charskipgram_step = _variant_step("charskipgram")
