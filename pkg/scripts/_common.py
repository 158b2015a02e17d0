"""Shared argument handling for the experiment scripts."""
import argparse

from lrod.loss import LossConfig
from lrod.portfolio import load_portfolio
from lrod.synthetic import (
    DESIGNED_SEED, GeneratorConfig, designed_portfolio, generate_synthetic_portfolio, read_key_values,
)


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--input", help="portfolio CSV; defaults to a generated book")
    p.add_argument("--designed", action="store_true", help="use the designed portfolio instead")
    p.add_argument("--book-seed", type=int, default=42, help="generator seed when no --input is given")
    p.add_argument("--loss-config", help="key = value loss settings")
    p.add_argument("--seed", type=int, default=0)
    return p


def book(args, **overrides):
    if args.input:
        return load_portfolio(args.input)
    if args.designed:
        return designed_portfolio(**overrides)
    cfg = GeneratorConfig(**overrides) if overrides else GeneratorConfig()
    return generate_synthetic_portfolio(cfg, args.book_seed)


def loss_config(args, **overrides):
    values = read_key_values(args.loss_config) if args.loss_config else {}
    cfg = LossConfig.from_mapping(values)
    return LossConfig(**{**cfg.__dict__, **overrides}) if overrides else cfg


__all__ = ["DESIGNED_SEED", "parser", "book", "loss_config"]
