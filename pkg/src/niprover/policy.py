"""Clause scoring and selection.

The proof state is summarized as the mean embedding of the processed set
(falling back to the negated-conjecture clauses while nothing has been
processed, which keeps early steps goal-directed).  Each unprocessed
clause is scored bilinearly against that summary and the next given
clause is drawn from a temperature softmax, or taken greedily.
"""

import numpy as np


def state_summary(p_embs, nc_embs):
    """Mean of processed-clause embeddings; negated-conjecture mean while
    the processed set is empty."""
    pool = p_embs if p_embs else nc_embs
    if not pool:
        raise ValueError("no embeddings to summarize")
    return np.mean(np.asarray(pool), axis=0)


def score(state, u_embs, w_attn):
    """Bilinear attention: s_i = u_i . (W state), one score per candidate."""
    if len(u_embs) == 0:
        raise ValueError("no candidate clauses to score")
    query = w_attn @ np.asarray(state)
    scores = np.asarray(u_embs) @ query
    if not np.isfinite(scores).all():
        raise FloatingPointError("non-finite clause scores")
    return scores


def softmax_t(scores, tau):
    """Temperature softmax with max-shift for stability."""
    if tau <= 0:
        raise ValueError("temperature must be positive")
    scaled = np.asarray(scores, dtype=np.float64) / tau
    scaled = scaled - scaled.max()
    exp = np.exp(scaled)
    return exp / exp.sum()


def select(probs, mode, rng=None):
    """Pick an index: 'sample' draws from probs, 'greedy' takes the argmax
    (lowest index on ties)."""
    probs = np.asarray(probs)
    if mode == "greedy":
        return int(np.argmax(probs))
    if mode == "sample":
        if rng is None:
            raise ValueError("sampling requires a generator")
        return int(rng.choice(len(probs), p=probs / probs.sum()))
    raise ValueError(f"unknown selection mode {mode!r}")
