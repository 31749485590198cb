"""Shared fixtures and generators for the test suite.

The services model is a small hand-built fixture exercised by most command
tests. The random generators produce arbitrary well-formed models, where
clauses, and commands for the property and fuzz tests; everything is driven
by a seeded random.Random so failures reproduce.
"""

from __future__ import annotations

import itertools
import random

import pytest

from feather.build import build_model
from feather.commands import RunMode, run_script
from feather.expressions import (
    AttrRef,
    Binary,
    EvalError,
    FeatureRef,
    Lit,
    TypeCheckError,
    Unary,
    VarRef,
    evaluate,
    typecheck,
)
from feather.model import Constraint, DecompKind, Feature, FeatureModel
from feather.parser import parse_commands, parse_script

SERVICES = """\
root "Web Services";
feature "Package 1" "Web Services" optional attribute stype "basic" attribute price 12.5;
feature "My Way or Highway" "Package 1" optional attribute stype "utility";
feature "Highway Jam" "Package 1" optional attribute stype "utility";
feature "Annoyed Birds" "Package 1" optional attribute stype "fun";
feature "3D Racing" "Package 1" or to "3D Racing" attribute stype "fun" attribute extracost 6;
feature "Ultimate Chess" "Package 1" or to "3D Racing" attribute stype "fun" attribute extracost 9;
feature "Package 2" "Web Services" optional attribute stype "basic" attribute price 24.99;
feature "Don't Wait in the City" "Package 2" alternative to "Don't Wait in the City" attribute stype "fun" attribute extracost 3;
feature "All Sideways" "Package 2" alternative to "Don't Wait in the City" attribute stype "fun" attribute extracost 4;
feature "Package 3" "Web Services" optional attribute stype "premium" attribute price 30.0;
feature "Dating Club" "Package 3" or to "Dating Club" attribute stype "fun" attribute extracost 8;
feature "Video Chat" "Package 3" or to "Dating Club" attribute stype "fun" attribute extracost 2;
feature "Stock Wizard" "Package 3" optional attribute stype "utility";
feature "Money Money Money" "Package 3" optional attribute stype "utility";
feature "Bull Market" "Package 3" optional attribute stype "utility";
feature "Infrastructure" "Web Services" mandatory;
feature "High Speed Connection Protocol" "Infrastructure" optional;
constraint "Video Chat" requires "High Speed Connection Protocol";
constraint "Highway Jam" excludes "All Sideways";
"""


def build(text: str) -> FeatureModel:
    ast, errors = parse_script(text)
    assert not errors, errors
    return build_model(ast)


def run(model: FeatureModel, command_text: str, mode=RunMode.IGNORE_ALL):
    ast, errors = parse_commands(command_text)
    assert not errors, errors
    result, diagnostics, _ = run_script(model, ast.commands, mode)
    return result, diagnostics


def parse_expr(text: str):
    """Parse a standalone expression through a where-clause."""
    ast, errors = parse_commands(f"removeall feature ZZZ where {text};")
    assert not errors, errors
    return ast.commands[0].where


@pytest.fixture
def services() -> FeatureModel:
    return build(SERVICES)


# -- structural comparison --------------------------------------------------


def group_partition(model: FeatureModel) -> set:
    """Sibling groups as frozensets of names; group ids do not matter."""
    groups: dict = {}
    for f in model.features.values():
        if f.group_id > 0:
            groups.setdefault(f.group_id, set()).add(f.name)
    return {frozenset(g) for g in groups.values()}


def isomorphic(a: FeatureModel, b: FeatureModel) -> bool:
    """Equality up to group id numbering and declaration order."""
    if set(a.features) != set(b.features) or a.root != b.root:
        return False
    for name, fa in a.features.items():
        fb = b.features[name]
        if (fa.parent, fa.decomp, fa.attributes) != (fb.parent, fb.decomp, fb.attributes):
            return False
        if (fa.group_id > 0) != (fb.group_id > 0):
            return False
    if group_partition(a) != group_partition(b):
        return False
    return ({c.effect_key() for c in a.constraints}
            == {c.effect_key() for c in b.constraints})


# -- brute-force resolution oracle ------------------------------------------


def brute_force_resolve(model: FeatureModel, variables, where) -> set:
    """Cross-product filtering over all features, no pruning at all."""
    variables = tuple(variables)
    names = list(model.features)
    satisfied = set()
    for combo in itertools.product(names, repeat=len(variables)):
        binding = dict(zip(variables, combo))
        if where is None:
            satisfied.add(combo)
            continue
        try:
            typecheck(where, model, binding)
            if evaluate(where, model, binding) is True:
                satisfied.add(combo)
        except (TypeCheckError, EvalError):
            pass
    return satisfied


# -- random model generation ------------------------------------------------

ATTR_POOL = ("size", "cost", "rank", "flag", "label", "ratio")


def random_value(rng: random.Random):
    return rng.choice([
        rng.randint(-5, 9),
        round(rng.uniform(-4.0, 9.0), 2),
        rng.random() < 0.5,
        rng.choice(["red", "green", "blue", "x y"]),
    ])


def random_model(rng: random.Random, max_features: int = 30,
                 max_attrs: int = 6) -> FeatureModel:
    count = rng.randint(1, max_features)
    names = [f"F{i}" for i in range(count)]
    model = FeatureModel.with_root(names[0])
    for name in names[1:]:
        parent = rng.choice(list(model.features))
        kind = rng.choice(list(DecompKind))
        join = None
        if kind.is_group and rng.random() < 0.5:
            siblings = [model.features[c] for c in model.children(parent)]
            matching = [s.group_id for s in siblings
                        if s.decomp is kind and s.group_id > 0]
            if matching:
                join = rng.choice(matching)
        model.attach_feature(Feature(name), parent, kind, join)
    for f in model.features.values():
        for attr in rng.sample(ATTR_POOL, rng.randint(0, min(max_attrs, len(ATTR_POOL)))):
            f.attributes[attr] = random_value(rng)
    pairs = [(a, b) for a in names for b in names if a != b]
    rng.shuffle(pairs)
    for a, b in pairs[:rng.randint(0, min(6, len(pairs)))]:
        model.add_constraint(Constraint(a, rng.choice(["requires", "excludes"]), b))
    return model


# -- random where-clause generation -----------------------------------------


# -- random command generation ----------------------------------------------


def _rand_name(rng: random.Random, model: FeatureModel) -> str:
    if rng.random() < 0.85:
        return rng.choice(list(model.features))
    return rng.choice(["Ghost", "Nope", "F999"])


def _rand_fdesc(rng, model, variables):
    from feather.expressions import FeatureRef as FR, VarRef as VR
    if variables and rng.random() < 0.4:
        return VR(rng.choice(variables))
    return FR(_rand_name(rng, model))


def _rand_value_expr(rng, model, variables, tag):
    from feather.expressions import Binary as B, Lit as L
    if tag == "numeric":
        e = L(rng.choice([rng.randint(-3, 9), round(rng.uniform(0, 9), 1)]))
        if rng.random() < 0.4:
            e = B(rng.choice("+-*/%"), e, L(rng.randint(0, 3)))
        if rng.random() < 0.3:
            e = B("+", AttrRef(_rand_fdesc(rng, model, variables),
                               rng.choice(ATTR_POOL)), e)
        return e
    if tag == "boolean":
        if rng.random() < 0.5:
            return L(rng.random() < 0.5)
        return random_where(rng, variables, model, depth=1)
    if tag == "string":
        return L(rng.choice(["red", "green", "blue"]))
    # inherited
    return AttrRef(_rand_fdesc(rng, model, variables),
                   rng.choice(ATTR_POOL + ("_name", "_parent", "_decomp")))


def _rand_attr_assigns(rng, model, variables, howmany):
    from feather.parser import AttrAssign
    out = []
    for name in rng.sample(ATTR_POOL, howmany):
        tag = rng.choice(["numeric", "boolean", "string", "inherited"])
        out.append(AttrAssign(name, tag, _rand_value_expr(rng, model, variables, tag)))
    return out


def _rand_decomp_spec(rng, model, variables):
    from feather.parser import DecompSpec
    if rng.random() < 0.25:
        kind = AttrRef(_rand_fdesc(rng, model, variables), "_decomp")
    else:
        kind = Lit(rng.choice(list(DecompKind)))
    sibling = None
    if rng.random() < 0.5:
        sibling = _rand_fdesc(rng, model, variables)
    return DecompSpec(kind, sibling)


def random_command(rng: random.Random, model: FeatureModel):
    """One random command of any of the ten types, possibly ill-behaved."""
    from feather import parser as p
    variables = ["V", "W"][:rng.randint(0, 2)]
    where = (random_where(rng, variables, model)
             if (variables or rng.random() < 0.3) else None)
    kind = rng.randrange(10)
    if kind == 0:
        return p.AddFeature(
            name=rng.choice(["N1", "N2", "N3", rng.choice(list(model.features))]),
            parent=(AttrRef(VarRef(variables[0]), "_name") if variables
                    and rng.random() < 0.4 else Lit(_rand_name(rng, model))),
            decomp=_rand_decomp_spec(rng, model, variables),
            attrs=_rand_attr_assigns(rng, model, variables, rng.randint(0, 2)),
            where=where)
    if kind == 1:
        return p.UpdateFeature(
            target=_rand_fdesc(rng, model, variables),
            new_name=rng.choice([None, "Renamed", rng.choice(list(model.features))]),
            parent=(Lit(_rand_name(rng, model)) if rng.random() < 0.5 else None),
            decomp=(_rand_decomp_spec(rng, model, variables)
                    if rng.random() < 0.5 else None),
            attrs=_rand_attr_assigns(rng, model, variables, rng.randint(0, 2)),
            where=where)
    if kind == 2:
        variables = variables or ["V"]
        return p.UpdateAllFeatures(
            var=variables[0],
            parent=(Lit(_rand_name(rng, model)) if rng.random() < 0.5 else None),
            decomp=(_rand_decomp_spec(rng, model, variables)
                    if rng.random() < 0.5 else None),
            attrs=_rand_attr_assigns(rng, model, variables, rng.randint(0, 2)),
            where=where)
    if kind == 3:
        return p.RemoveFeature(target=_rand_fdesc(rng, model, variables), where=where)
    if kind == 4:
        variables = variables or ["V"]
        return p.RemoveAllFeatures(var=variables[0], where=where)
    left = _rand_fdesc(rng, model, variables)
    right = _rand_fdesc(rng, model, variables)
    ctype = rng.choice(["requires", "excludes"])
    if kind == 5:
        return p.AddConstraint(left=left, kind=ctype, right=right, where=where)
    if kind in (6, 7):
        cls = p.UpdateConstraint if kind == 6 else p.UpdateAllConstraints
        slots = rng.sample(["leftfeature", "constrainttype", "rightfeature"],
                           rng.randint(1, 2))
        return cls(
            left=left, kind=ctype, right=right, where=where,
            new_left=(AttrRef(_rand_fdesc(rng, model, variables), "_name")
                      if "leftfeature" in slots else None),
            new_kind=(rng.choice(["requires", "excludes"])
                      if "constrainttype" in slots else None),
            new_right=(Lit(_rand_name(rng, model))
                       if "rightfeature" in slots else None),
            updates=slots)
    cls = p.RemoveConstraint if kind == 8 else p.RemoveAllConstraints
    return cls(left=left, kind=ctype, right=right, where=where)


def _random_operand(rng: random.Random, variables, model: FeatureModel):
    subject = (VarRef(rng.choice(variables)) if variables and rng.random() < 0.8
               else FeatureRef(rng.choice(list(model.features))))
    attr = rng.choice(ATTR_POOL + ("_name", "_parent", "_decomp", "_decompID"))
    return AttrRef(subject, attr)


def random_where(rng: random.Random, variables, model: FeatureModel, depth: int = 2):
    """A random boolean expression; often ill-typed for some bindings."""
    if depth <= 0 or rng.random() < 0.3:
        left = _random_operand(rng, variables, model)
        if left.attr == "_decomp":
            return Binary(rng.choice(["=", "<>"]), left,
                          Lit(rng.choice(list(DecompKind))))
        if left.attr == "_decompID":
            return Binary(rng.choice(["=", "<>"]), left,
                          _random_operand(rng, variables, model))
        if left.attr in ("_name", "_parent"):
            right = (Lit(rng.choice(["F0", "F1", "F2", "red"]))
                     if rng.random() < 0.5
                     else _random_operand(rng, variables, model))
            return Binary(rng.choice(["=", "<>"]), left, right)
        op = rng.choice(["<", "<=", ">", ">=", "=", "<>"])
        right = (Lit(random_value(rng)) if rng.random() < 0.6
                 else _random_operand(rng, variables, model))
        if rng.random() < 0.3:
            right = Binary(rng.choice(["+", "-", "*", "/"]), right,
                           Lit(rng.randint(1, 4)))
        return Binary(op, left, right)
    op = rng.choice(["and", "and", "or", "not"])
    if op == "not":
        return Unary("not", random_where(rng, variables, model, depth - 1))
    return Binary(op, random_where(rng, variables, model, depth - 1),
                  random_where(rng, variables, model, depth - 1))
