import random
from fractions import Fraction

import pytest

from ordstat import FiniteTrial, Rank, Rational, Statistic, lex_tuple

TRIAL_CORPUS_SEED = 20260808
TRIAL_CORPUS_SIZE = 200


def generate_trials(count=TRIAL_CORPUS_SIZE, seed=TRIAL_CORPUS_SEED):
    """Deterministic corpus of finite trials with tie-rich statistics.

    Trials have 2-12 outcomes with random rational probabilities (some
    zero), statistics draw from a small value grid so ties are common, and
    value shapes vary between ranks, rationals and rank pairs.
    """
    rng = random.Random(seed)
    cases = []
    for idx in range(count):
        n = rng.randint(2, 12)
        weights = [rng.randint(1, 60) for _ in range(n)]
        if idx % 10 == 3 and n >= 3:
            weights[rng.randrange(n)] = 0
        total = sum(weights)
        labels = [f"o{i}" for i in range(n)]
        trial = FiniteTrial(tuple((l, Fraction(w, total)) for l, w in zip(labels, weights)))
        kind = rng.choice(("rank", "rank", "rational", "pair"))
        values = {}
        for label in labels:
            if kind == "rank":
                values[label] = Rank(rng.randint(0, max(1, n // 2)))
            elif kind == "rational":
                values[label] = Rational(Fraction(rng.randint(-3, 3), rng.randint(1, 4)))
            else:
                values[label] = lex_tuple([Rank(rng.randint(0, 2)), Rank(rng.randint(0, 2))])
        cases.append((trial, Statistic(values)))
    return cases


@pytest.fixture(scope="session")
def trial_corpus():
    return generate_trials()
