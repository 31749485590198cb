"""Resolution of feature variables against the live model.

A command's variables are resolved jointly: the result is the set of
variable-to-feature tuples whose binding satisfies the where-clause. The
search prunes per-variable candidate domains by attribute presence and type
compatibility and checks where-conjuncts as soon as their variables are
bound; both prunings are semantics-preserving, since a pruned tuple could
never typecheck and evaluate to true.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expressions import (
    Binary,
    EvalError,
    TypeCheckError,
    compatible,
    evaluate,
    referenced_usages,
    type_of,
    typecheck,
    variables_in,
)
from .model import FeatureModel


@dataclass
class ResolutionSet:
    variables: tuple
    tuples: list  # equal-length name tuples, declaration-order lexicographic

    def bindings(self):
        for t in self.tuples:
            yield dict(zip(self.variables, t))

    def project(self, var: str) -> list:
        """Distinct values for one variable, preserving enumeration order."""
        i = self.variables.index(var)
        seen, out = set(), []
        for t in self.tuples:
            if t[i] not in seen:
                seen.add(t[i])
                out.append(t[i])
        return out


@dataclass
class Ambiguous:
    values: list


class NoResolution:
    pass


NO_RESOLUTION = NoResolution()


def candidate_domain(model: FeatureModel, usages: list) -> list:
    """Features admissible for a variable given its (attr, context) usages."""
    out = []
    for f in model.features.values():
        if all(_admits(f, attr, ctx) for attr, ctx in usages):
            out.append(f.name)
    return out


def _admits(f, attr: str, ctx: str) -> bool:
    if attr in ("_name", "_parent"):
        return compatible("string", ctx)
    if attr == "_decomp":
        return not f.is_root and compatible("decomp", ctx)
    if attr == "_decompID":
        return not f.is_root and compatible("decomp_id", ctx)
    if attr not in f.attributes:
        return False
    return compatible(type_of(f.attributes[attr]), ctx)


def merge_usages(*usage_maps: dict) -> dict:
    merged: dict = {}
    for m in usage_maps:
        for var, pairs in m.items():
            merged.setdefault(var, []).extend(pairs)
    return merged


def _conjuncts(expr) -> list:
    if isinstance(expr, Binary) and expr.op == "and":
        return _conjuncts(expr.left) + _conjuncts(expr.right)
    return [expr]


def resolve(model: FeatureModel, variables, where=None,
            usages: dict | None = None) -> ResolutionSet:
    """All tuples over the candidate domains satisfying the where-clause.

    `usages` widens the domain restriction beyond the where-clause (a command
    passes the usages of every expression it contains); when omitted it is
    computed from the where-clause alone. A binding under which the
    where-clause fails to typecheck, or raises a dynamic error, does not
    satisfy the clause.
    """
    variables = tuple(variables)
    if usages is None:
        usages = referenced_usages(where) if where is not None else {}
    domains = {v: candidate_domain(model, usages.get(v, [])) for v in variables}

    conjuncts = []
    if where is not None:
        for c in _conjuncts(where):
            conjuncts.append((c, variables_in(c) & set(variables)))

    # variables with the smallest domains first; output order is restored below
    order = sorted(variables, key=lambda v: len(domains[v]))
    pending = list(conjuncts)
    binding: dict = {}
    results = []

    def _holds(expr) -> bool:
        try:
            typecheck(expr, model, binding)
            return evaluate(expr, model, binding) is True
        except (TypeCheckError, EvalError):
            return False

    def search(depth: int, pending: list) -> None:
        ready = [c for c, vs in pending if vs <= binding.keys()]
        if any(not _holds(c) for c in ready):
            return
        if depth == len(order):
            results.append(tuple(binding[v] for v in variables))
            return
        rest = [(c, vs) for c, vs in pending if not vs <= binding.keys()]
        var = order[depth]
        for name in domains[var]:
            binding[var] = name
            search(depth + 1, rest)
            del binding[var]

    search(0, pending)

    index = {name: i for i, name in enumerate(model.features)}
    results.sort(key=lambda t: tuple(index[n] for n in t))
    return ResolutionSet(variables, results)


def derive_unambiguous(resolutions: ResolutionSet, evaluate_slot):
    """Evaluate a slot under every resolution tuple.

    Returns the common value when all tuples agree, Ambiguous(values) when
    they differ, NO_RESOLUTION on an empty set. Type tags matter: an integer
    and a real of equal magnitude count as different derived values.
    """
    if not resolutions.tuples:
        return NO_RESOLUTION
    values, keys = [], set()
    for binding in resolutions.bindings():
        v = evaluate_slot(binding)
        key = (type(v).__name__, v)
        if key not in keys:
            keys.add(key)
            values.append(v)
    if len(values) == 1:
        return values[0]
    return Ambiguous(values)
