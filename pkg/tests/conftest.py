"""Shared fixtures: small trained models and synthetic sequences."""

import pytest

from mocapcodec import batch_from_sequences, gen_synthetic, train_lsdt


@pytest.fixture(scope="session")
def seq31():
    return gen_synthetic(31, 300, rank=8, seed=4)


@pytest.fixture(scope="session")
def model31():
    train_seq = gen_synthetic(31, 400, rank=8, seed=3)
    return train_lsdt(batch_from_sequences([train_seq]), P=8, K=40)


@pytest.fixture(scope="session")
def seq13():
    return gen_synthetic(13, 200, rank=4, seed=6)


@pytest.fixture(scope="session")
def model13():
    train_seq = gen_synthetic(13, 200, rank=4, seed=5)
    return train_lsdt(batch_from_sequences([train_seq]), P=4, K=30)
