"""Hamiltonian front end.

Parses expressions like ``-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4``
into a flat sum of products of D-finite atoms, provides each atom's
annihilating operators and lifted Pfaffian system, and supplies the
exact symbolic differentiation oracle used throughout the test suite.

Supported atoms (v1): monomials in the state variables and parameters,
and sin/cos/exp of a rational multiple of a single state variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy

from .errors import HamSyntaxError, UnsupportedAtom
from .ops import DiffOperator
from .orders import TermOrder, unit_exp
from .pfaffian import (HolonomicFunction, PfaffianSystem, canonicalize,
                       closure_prod, closure_sum, constant, scale)
from .ring import Context, NumPoint

# -- tokenizer / recursive-descent parser ------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|([-+*/^()]))")
_FUNCTIONS = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        while self.pos < len(text):
            m = _TOKEN_RE.match(text, self.pos)
            if not m or m.end() == m.start():
                if text[self.pos:].strip():
                    raise HamSyntaxError("unexpected character %r" % text[self.pos], self.pos)
                break
            self.tokens.append((m.group(0).strip(), m.start(0) + len(m.group(0)) - len(m.group(0).lstrip())))
            self.pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok


class _Parser:
    """Precedence-climbing parser producing a sympy expression."""

    def __init__(self, text: str):
        self.tz = _Tokenizer(text)

    def parse(self):
        e = self._expr()
        tok, pos = self.tz.peek()
        if tok is not None:
            raise HamSyntaxError("unexpected token %r" % tok, pos)
        return e

    def _expr(self):
        tok, _ = self.tz.peek()
        if tok in ("+", "-"):
            self.tz.next()
            e = -self._term() if tok == "-" else self._term()
        else:
            e = self._term()
        while True:
            tok, _ = self.tz.peek()
            if tok == "+":
                self.tz.next()
                e = e + self._term()
            elif tok == "-":
                self.tz.next()
                e = e - self._term()
            else:
                return e

    def _term(self):
        e = self._power()
        while True:
            tok, pos = self.tz.peek()
            if tok == "*":
                self.tz.next()
                e = e * self._power()
            elif tok == "/":
                self.tz.next()
                rhs = self._power()
                if rhs.is_zero:
                    raise HamSyntaxError("division by zero", pos)
                e = e / rhs
            else:
                return e

    def _power(self):
        base = self._atom()
        tok, pos = self.tz.peek()
        if tok == "^":
            self.tz.next()
            etok, epos = self.tz.next()
            neg = False
            if etok == "-":
                neg = True
                etok, epos = self.tz.next()
            if etok is None or not etok.isdigit():
                raise HamSyntaxError("exponent must be an integer", epos)
            k = int(etok)
            return base ** (-k if neg else k)
        return base

    def _atom(self):
        tok, pos = self.tz.next()
        if tok is None:
            raise HamSyntaxError("unexpected end of input", pos)
        if tok == "(":
            e = self._expr()
            close, cpos = self.tz.next()
            if close != ")":
                raise HamSyntaxError("expected ')'", cpos)
            return e
        if tok == "-":
            return -self._atom()
        if tok == "+":
            return self._atom()
        if re.fullmatch(r"\d+\.\d+", tok):
            return sympy.Rational(tok)
        if tok.isdigit():
            return sympy.Integer(tok)
        if tok in _FUNCTIONS:
            open_, opos = self.tz.next()
            if open_ != "(":
                raise HamSyntaxError("expected '(' after %s" % tok, opos)
            arg = self._expr()
            close, cpos = self.tz.next()
            if close != ")":
                raise HamSyntaxError("expected ')'", cpos)
            return _FUNCTIONS[tok](arg)
        if re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", tok):
            return sympy.Symbol(tok)
        raise HamSyntaxError("unexpected token %r" % tok, pos)


# -- AST ---------------------------------------------------------------

@dataclass(frozen=True, order=True)
class TransAtom:
    """sin/cos/exp of (scale * state variable)."""
    kind: str
    var: int
    scale: Fraction


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    param_exps: tuple[int, ...]   # may be negative (division by parameters)
    mono: tuple[int, ...]         # exponents over x_1..x_n,p_1..p_n
    trans: tuple[TransAtom, ...]  # sorted, with multiplicity

    def shape(self):
        return (self.param_exps, self.mono, self.trans)


@dataclass(frozen=True)
class HamiltonianAST:
    n: int
    params: tuple[str, ...]
    terms: tuple[Term, ...]


def parse(text: str, n: int, params: tuple[str, ...] = ()) -> HamiltonianAST:
    """Parse a Hamiltonian expression into a canonical atom-product sum."""
    expr = _Parser(text).parse()
    zvars = ["x%d" % (i + 1) for i in range(n)] + ["p%d" % (i + 1) for i in range(n)]
    known = set(zvars) | set(params)
    for s in expr.free_symbols:
        if str(s) not in known:
            raise HamSyntaxError("unknown symbol %r" % str(s), text.find(str(s)))
    return _normalize(sympy.expand(expr), n, params, zvars)


def _normalize(expr, n, params, zvars) -> HamiltonianAST:
    zindex = {name: i for i, name in enumerate(zvars)}
    pindex = {name: i for i, name in enumerate(params)}
    terms = {}
    for addend in sympy.Add.make_args(expr):
        if addend.is_zero:
            continue
        coeff = Fraction(1)
        param_exps = [0] * len(params)
        mono = [0] * (2 * n)
        trans = []
        for factor in sympy.Mul.make_args(addend):
            base, k = factor.as_base_exp()
            if base is sympy.E:
                # sympy stores exp(u) as E**u
                var, scl = _linear_arg(k, zindex)
                trans.append(TransAtom("exp", var, scl))
                continue
            if base.is_Rational and k.is_Integer:
                coeff *= Fraction(int(base.p), int(base.q)) ** int(k)
                continue
            if base.is_Symbol and k.is_Integer:
                name = str(base)
                if name in pindex:
                    param_exps[pindex[name]] += int(k)
                    continue
                if name in zindex:
                    if int(k) < 0:
                        raise UnsupportedAtom(
                            "division by state variable %s is not supported" % name)
                    mono[zindex[name]] += int(k)
                    continue
            if base.func in (sympy.sin, sympy.cos, sympy.exp) and k.is_Integer and int(k) > 0:
                kind = base.func.__name__
                var, scl = _linear_arg(base.args[0], zindex)
                trans.extend([TransAtom(kind, var, scl)] * int(k))
                continue
            raise UnsupportedAtom("unsupported factor %s" % factor)
        key = (tuple(param_exps), tuple(mono), tuple(sorted(trans)))
        terms[key] = terms.get(key, Fraction(0)) + coeff
    out = [Term(c, pe, mo, tr) for (pe, mo, tr), c in terms.items() if c != 0]
    out.sort(key=lambda t: (sum(t.mono) + len(t.trans), t.mono, t.trans, t.param_exps))
    return HamiltonianAST(n, tuple(params), tuple(out))


def _linear_arg(arg, zindex):
    """Argument of a transcendental atom: (rational) * (state variable)."""
    c, rest = arg.as_coeff_Mul()
    if rest.is_Symbol and str(rest) in zindex and c.is_Rational:
        return zindex[str(rest)], Fraction(int(c.p), int(c.q))
    raise UnsupportedAtom("transcendental argument must be a rational multiple "
                         "of one state variable, got %s" % arg)


# -- pretty printer / conversion ---------------------------------------

def ast_to_expr(ast: HamiltonianAST):
    zsyms = sympy.symbols(["x%d" % (i + 1) for i in range(ast.n)]
                          + ["p%d" % (i + 1) for i in range(ast.n)])
    psyms = sympy.symbols(list(ast.params)) if ast.params else []
    if ast.params and not isinstance(psyms, (list, tuple)):
        psyms = [psyms]
    total = sympy.Integer(0)
    for t in ast.terms:
        e = sympy.Rational(t.coeff.numerator, t.coeff.denominator)
        for s, k in zip(psyms, t.param_exps):
            e *= s ** k
        for s, k in zip(zsyms, t.mono):
            e *= s ** k
        for atom in t.trans:
            f = _FUNCTIONS[atom.kind]
            e *= f(sympy.Rational(atom.scale.numerator, atom.scale.denominator) * zsyms[atom.var])
        total += e
    return total


def pretty(ast: HamiltonianAST) -> str:
    zn = ["x%d" % (i + 1) for i in range(ast.n)] + ["p%d" % (i + 1) for i in range(ast.n)]
    pieces = []
    for t in ast.terms:
        factors = []
        c = t.coeff
        if abs(c) != 1 or (not any(t.param_exps) and not any(t.mono) and not t.trans):
            factors.append(str(abs(c.numerator)) if c.denominator == 1
                           else "%d/%d" % (abs(c.numerator), c.denominator))
        for name, k in zip(ast.params, t.param_exps):
            if k:
                factors.append(name if k == 1 else "%s^%d" % (name, k))
        for name, k in zip(zn, t.mono):
            if k:
                factors.append(name if k == 1 else "%s^%d" % (name, k))
        for atom in t.trans:
            arg = zn[atom.var] if atom.scale == 1 else "%s*%s" % (_frac_str(atom.scale), zn[atom.var])
            factors.append("%s(%s)" % (atom.kind, arg))
        body = "*".join(factors)
        pieces.append(("- " if c < 0 else "+ ") + body)
    if not pieces:
        return "0"
    first = pieces[0]
    text = (first[2:] if first.startswith("+ ") else "-" + first[2:])
    return " ".join([text] + pieces[1:])


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else "%d/%d" % (f.numerator, f.denominator)


# -- differentiation oracle --------------------------------------------

def _diff_term(t: Term, i: int, nparams: int):
    out = []
    if t.mono[i] > 0:
        mono = list(t.mono)
        k = mono[i]
        mono[i] -= 1
        out.append(Term(t.coeff * k, t.param_exps, tuple(mono), t.trans))
    for j, atom in enumerate(t.trans):
        if atom.var != i:
            continue
        rest = t.trans[:j] + t.trans[j + 1:]
        if atom.kind == "sin":
            new = TransAtom("cos", i, atom.scale)
            c = t.coeff * atom.scale
        elif atom.kind == "cos":
            new = TransAtom("sin", i, atom.scale)
            c = -t.coeff * atom.scale
        else:
            new = atom
            c = t.coeff * atom.scale
        out.append(Term(c, t.param_exps, t.mono, tuple(sorted(rest + (new,)))))
    return out


def oracle_diff(ast: HamiltonianAST, alpha) -> HamiltonianAST:
    """Exact d^alpha of the AST, closed under the atom family."""
    terms = list(ast.terms)
    for i, k in enumerate(alpha):
        for _ in range(k):
            nxt = []
            for t in terms:
                nxt.extend(_diff_term(t, i, len(ast.params)))
            terms = _merge(nxt)
    return HamiltonianAST(ast.n, ast.params, tuple(terms))


def _merge(terms):
    acc = {}
    for t in terms:
        acc[t.shape()] = acc.get(t.shape(), Fraction(0)) + t.coeff
    out = [Term(c, pe, mo, tr) for (pe, mo, tr), c in acc.items() if c != 0]
    out.sort(key=lambda t: (sum(t.mono) + len(t.trans), t.mono, t.trans, t.param_exps))
    return out


def ast_eval(ast: HamiltonianAST, point: NumPoint):
    """High-precision numeric value of the AST at a point."""
    total = mpmath.mpf(0)
    coords = [mpmath.mpf(c) for c in point.coords]
    fns = {"sin": mpmath.sin, "cos": mpmath.cos, "exp": mpmath.exp}
    for t in ast.terms:
        v = mpmath.mpf(t.coeff.numerator) / t.coeff.denominator
        for name, k in zip(ast.params, t.param_exps):
            v *= mpmath.mpf(point.params[name]) ** k
        for i, k in enumerate(t.mono):
            if k:
                v *= coords[i] ** k
        for atom in t.trans:
            s = mpmath.mpf(atom.scale.numerator) / atom.scale.denominator
            v *= fns[atom.kind](s * coords[atom.var])
        total += v
    return total


# -- atoms: annihilators and lifted Pfaffian systems -------------------

@dataclass
class AtomAnnihilator:
    kind: str
    operators: list
    system_factory: object  # callable (Context, NumPoint) -> HolonomicFunction


def apply_operator(op: DiffOperator, expr, ctx: Context):
    """Action of a differential operator on a sympy expression."""
    total = sympy.Integer(0)
    for alpha, c in op.terms.items():
        piece = expr
        for i, k in enumerate(alpha):
            if k:
                piece = sympy.diff(piece, ctx.symbols[i], k)
        total += c.as_expr() * piece
    return sympy.simplify(total)


def _power_hf(ctx: Context, i: int, k: int, zbar: NumPoint) -> HolonomicFunction:
    """Holonomic representation of z_i^k.

    Uses the first-order (Euler) operator z_i d_i - k when the base
    coordinate is nonzero; falls back to the nilpotent companion of
    d_i^{k+1} at a vanishing coordinate.
    """
    coord = mpmath.mpf(zbar.coords[i])
    if coord != 0:
        A = [[[ctx.zero]] for _ in range(ctx.nz)]
        A[i] = [[ctx.rational(k) / ctx.var(i)]]
        system = PfaffianSystem(ctx, A, basis=[(0,) * ctx.nz], check=False)
        return HolonomicFunction(system, [ctx.one], zbar, [coord ** k])
    d = k + 1
    A = [[[ctx.zero] * d for _ in range(d)] for _ in range(ctx.nz)]
    for r in range(d - 1):
        A[i][r][r + 1] = ctx.one
    basis = [unit_exp(ctx.nz, i, j) for j in range(d)]
    system = PfaffianSystem(ctx, A, basis=basis, check=False)
    # values of d^j z^k at the base coordinate
    qbar = []
    for j in range(d):
        fall = 1
        for m in range(j):
            fall *= (k - m)
        qbar.append(mpmath.mpf(fall) * coord ** (k - j) if j <= k else mpmath.mpf(0))
    return HolonomicFunction(system, [ctx.one] + [ctx.zero] * (d - 1), zbar, qbar)


def _trans_hf(ctx: Context, atom: TransAtom, z̄: NumPoint) -> HolonomicFunction:
    i = atom.var
    c = ctx.rational(Fraction(atom.scale))
    cm = mpmath.mpf(atom.scale.numerator) / atom.scale.denominator
    coord = mpmath.mpf(z̄.coords[i])
    if atom.kind == "exp":
        A = [[[ctx.zero]] for _ in range(ctx.nz)]
        A[i] = [[c]]
        system = PfaffianSystem(ctx, A, basis=[(0,) * ctx.nz], check=False)
        return HolonomicFunction(system, [ctx.one], z̄, [mpmath.exp(cm * coord)])
    A = [[[ctx.zero, ctx.zero], [ctx.zero, ctx.zero]] for _ in range(ctx.nz)]
    A[i] = [[ctx.zero, ctx.one], [-(c * c), ctx.zero]]
    basis = [(0,) * ctx.nz, unit_exp(ctx.nz, i)]
    system = PfaffianSystem(ctx, A, basis=basis, check=False)
    if atom.kind == "sin":
        qbar = [mpmath.sin(cm * coord), cm * mpmath.cos(cm * coord)]
    else:
        qbar = [mpmath.cos(cm * coord), -cm * mpmath.sin(cm * coord)]
    return HolonomicFunction(system, [ctx.one, ctx.zero], z̄, qbar)


def atom_annihilator(ctx: Context, atom) -> AtomAnnihilator:
    """Annihilating operators (one per derivation) for a single atom."""
    ops = []
    if isinstance(atom, TransAtom):
        i = atom.var
        c = ctx.rational(Fraction(atom.scale))
        for j in range(ctx.nz):
            if j != i:
                ops.append(DiffOperator.partial(ctx, j))
        if atom.kind == "exp":
            ops.append(DiffOperator.partial(ctx, i) - DiffOperator.from_coefficient(c))
        else:
            d2 = DiffOperator.partial(ctx, i, 2)
            ops.append(d2 + DiffOperator.from_coefficient(c * c))
        factory = lambda cctx, zb: _trans_hf(cctx, atom, zb)
        return AtomAnnihilator(atom.kind, ops, factory)
    # monomial atom: exponent tuple over the state variables
    mono = tuple(atom)
    for i in range(ctx.nz):
        k = mono[i]
        if k == 0:
            ops.append(DiffOperator.partial(ctx, i))
        else:
            euler = (DiffOperator.from_coefficient(ctx.var(i)) * DiffOperator.partial(ctx, i)
                     - DiffOperator.from_coefficient(ctx.rational(k)))
            ops.append(euler)
    factory = lambda cctx, zb: monomial_hf(cctx, mono, zb)
    return AtomAnnihilator("monomial", ops, factory)


def monomial_hf(ctx: Context, mono, z̄: NumPoint) -> HolonomicFunction:
    hf = None
    for i, k in enumerate(mono):
        if k == 0:
            continue
        part = _power_hf(ctx, i, k, z̄)
        hf = part if hf is None else closure_prod(hf, part)
    if hf is None:
        return constant(ctx, 1, z̄)
    return hf


def build_h(ast: HamiltonianAST, ctx: Context, z̄: NumPoint,
            order: TermOrder | None = None):
    """Assemble the holonomic representation of the parsed Hamiltonian.

    Returns (canonical HolonomicFunction, annihilating operators found
    while canonicalizing).
    """
    if not ast.terms:
        raise ValueError("cannot build a holonomic representation of 0")
    if ast.n != ctx.n or ast.params != ctx.params:
        raise ValueError("AST and context disagree on variables/parameters")
    total = None
    for t in ast.terms:
        hf = monomial_hf(ctx, t.mono, z̄)
        for atom in t.trans:
            hf = closure_prod(hf, _trans_hf(ctx, atom, z̄))
        coeff = ctx.rational(Fraction(t.coeff))
        for name, k in zip(ctx.params, t.param_exps):
            coeff = coeff * ctx.param(name) ** k
        hf = scale(hf, coeff)
        total = hf if total is None else closure_sum(total, hf)
    return canonicalize(total, order=order)
