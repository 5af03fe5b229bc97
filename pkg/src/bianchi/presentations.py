"""Group presentations and fundamental-domain cell data, shipped as JSON.

Words are tuples of ``(generator index, exponent)`` pairs kept freely
reduced.  Relator strings use a small grammar::

    word  := term*
    term  := atom ('^' int)?
    atom  := NAME | '(' word ')' | '[' word ',' word ']'

so ``"(B U B U^-1)^2"`` and ``"[t, u]"`` parse as expected.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .ring import Mat2, quad_ring

Word = tuple  # tuple[tuple[int, int], ...]

SUPPORTED_D = (1, 2, 3, 7, 11)
STABILIZER_ORDERS = {"1": 1, "C2": 2, "C3": 3, "C4": 4, "D2": 4, "D4": 8, "S3": 6, "A4": 12, "S4": 24}


class DataError(ValueError):
    """Shipped or user-supplied data failed validation."""


class UnsupportedGroup(LookupError):
    pass


def group_id(d: int, kind: str) -> str:
    kind = kind.upper()
    if kind not in ("PSL", "PGL") or d not in SUPPORTED_D:
        raise UnsupportedGroup(f"no such group: {kind}2(O_{d})")
    return f"{kind}2_O{d}"


def parse_group_id(gid: str) -> tuple[int, str]:
    m = re.fullmatch(r"(PSL|PGL)2_O(\d+)", gid)
    if not m:
        raise UnsupportedGroup(f"malformed group id {gid!r}")
    return int(m.group(2)), m.group(1)


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------


def reduce_word(letters) -> Word:
    out: list[list[int]] = []
    for g, e in letters:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            out[-1][1] += e
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([g, e])
    return tuple((g, e) for g, e in out)


def invert_word(w: Word) -> Word:
    return tuple((g, -e) for g, e in reversed(w))


def word_power(w: Word, n: int) -> Word:
    base = w if n >= 0 else invert_word(w)
    return reduce_word(list(base) * abs(n))


def letters(w: Word):
    """Expand to single letters (g, +1 / -1)."""
    for g, e in w:
        s = 1 if e > 0 else -1
        for _ in range(abs(e)):
            yield g, s


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z_0-9']*)|(?P<pow>\^\s*-?\d+)|(?P<sym>[()\[\],]))")


def parse_word(text: str, names) -> Word:
    """Parse a relator expression against a list of generator names."""
    index = {n: i for i, n in enumerate(names)}
    toks = []
    pos = 0
    text = text.strip()
    if text == "1":
        return ()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DataError(f"cannot parse word {text!r} at {pos}")
        pos = m.end()
        if m.group("name"):
            toks.append(("name", m.group("name")))
        elif m.group("pow"):
            toks.append(("pow", int(m.group("pow")[1:].strip())))
        else:
            toks.append((m.group("sym"), None))
    toks.append(("end", None))
    i = 0

    def word(stop):
        nonlocal i
        out: list = []
        while toks[i][0] not in stop:
            out.extend(term())
        return out

    def term():
        nonlocal i
        kind, val = toks[i]
        if kind == "name":
            if val not in index:
                raise DataError(f"unknown generator {val!r} in {text!r}")
            i += 1
            atom = [(index[val], 1)]
        elif kind == "(":
            i += 1
            atom = word({")"})
            i += 1
        elif kind == "[":
            i += 1
            x = word({","})
            i += 1
            y = word({"]"})
            i += 1
            x, y = reduce_word(x), reduce_word(y)
            atom = list(x + y + invert_word(x) + invert_word(y))
        else:
            raise DataError(f"unexpected token {kind!r} in {text!r}")
        if toks[i][0] == "pow":
            n = toks[i][1]
            i += 1
            atom = list(word_power(reduce_word(atom), n))
        return atom

    w = word({"end"})
    return reduce_word(w)


def format_word(w: Word, names) -> str:
    if not w:
        return "1"
    return " ".join(names[g] if e == 1 else f"{names[g]}^{e}" for g, e in w)


# ---------------------------------------------------------------------------
# Matrix (de)serialisation
# ---------------------------------------------------------------------------


def _entry(x):
    if isinstance(x, int):
        return (x, 0)
    if isinstance(x, list) and len(x) == 2:
        return (int(x[0]), int(x[1]))
    if isinstance(x, dict):
        return (int(x["a"]), int(x["b"]))
    raise DataError(f"bad matrix entry {x!r}")


def matrix_from_json(obj, d) -> Mat2:
    (a, b), (c, e) = obj
    return Mat2(_entry(a), _entry(b), _entry(c), _entry(e), d)


def matrix_to_json(M: Mat2):
    def enc(x):
        return x[0] if x[1] == 0 else [x[0], x[1]]

    a, b, c, e = M.entries
    return [[enc(a), enc(b)], [enc(c), enc(e)]]


def is_central(M: Mat2) -> bool:
    return M.scalar_unit() is not None


def projective_order(M: Mat2, bound: int = 24) -> int | None:
    P = M
    for n in range(1, bound + 1):
        if is_central(P):
            return n
        P = P * M
    return None


def closure(gens: list[Mat2], bound: int = 24) -> dict:
    """All elements (keyed projectively) of the finite group generated by gens."""
    if not gens:
        return {}
    d = gens[0].d
    I = Mat2.identity(d)
    seen = {I.projective_key(): I}
    frontier = [I]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g
                k = y.projective_key()
                if k not in seen:
                    seen[k] = y
                    nxt.append(y)
                    if len(seen) > bound:
                        raise DataError("stabilizer group is larger than expected")
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# Presentations
# ---------------------------------------------------------------------------


@dataclass
class GroupPresentation:
    gid: str
    d: int
    kind: str
    names: list[str]
    matrices: list[Mat2]
    relators: list[Word]
    roles: dict = field(default_factory=dict)   # 'a', 't', 'u', optional 'l', 'delta'
    source: str = ""

    @property
    def ngens(self):
        return len(self.names)

    def evaluate(self, w: Word) -> Mat2:
        return evaluate_word(w, self)

    def validate(self):
        for w in self.relators:
            M = evaluate_word(w, self)
            if not is_central(M):
                raise DataError(f"{self.gid}: relator {format_word(w, self.names)} evaluates to {M}")
            if self.kind == "PSL" and M.det() != (1, 0):
                raise DataError(f"{self.gid}: relator has determinant {M.det()}")
        for M in self.matrices:
            if not quad_ring(self.d).is_unit(M.det()):
                raise DataError(f"{self.gid}: generator with non-unit determinant")
            if self.kind == "PSL" and M.det() != (1, 0):
                raise DataError(f"{self.gid}: PSL generator with determinant {M.det()}")
        return self

    def index(self, name: str) -> int:
        return self.names.index(name)

    def to_json(self):
        return {
            "d": self.d,
            "kind": self.kind,
            "source": self.source,
            "generators": {n: matrix_to_json(M) for n, M in zip(self.names, self.matrices)},
            "relators": [format_word(w, self.names) for w in self.relators],
            "roles": self.roles,
        }


def evaluate_word(w: Word, P: GroupPresentation) -> Mat2:
    out = Mat2.identity(P.d)
    invs: dict[int, Mat2] = {}
    for g, e in w:
        if g < 0 or g >= P.ngens:
            raise IndexError(f"generator index {g} out of range")
        base = P.matrices[g]
        if e < 0:
            base = invs.setdefault(g, base.inverse())
        for _ in range(abs(e)):
            out = out * base
    return out


def presentation_from_json(gid: str, obj) -> GroupPresentation:
    d, kind = obj["d"], obj["kind"]
    names = list(obj["generators"])
    mats = [matrix_from_json(obj["generators"][n], d) for n in names]
    rels = [parse_word(r, names) for r in obj["relators"]]
    return GroupPresentation(gid, d, kind, names, mats, rels, dict(obj.get("roles", {})), obj.get("source", ""))


def _data_path(name: str):
    return resources.files("bianchi").joinpath("data").joinpath(name)


@lru_cache(maxsize=None)
def _shipped(name: str) -> dict:
    return json.loads(_data_path(name).read_text())


@lru_cache(maxsize=None)
def load_presentation(gid: str) -> GroupPresentation:
    """Load and validate one of the ten shipped presentations."""
    data = _shipped("presentations.json")
    if gid not in data:
        raise UnsupportedGroup(f"no presentation shipped for {gid}")
    return presentation_from_json(gid, data[gid]).validate()


def presentation_from_file(path) -> GroupPresentation:
    obj = json.loads(Path(path).read_text())
    gid = obj.get("group") or group_id(obj["d"], obj["kind"])
    return presentation_from_json(gid, obj).validate()


# ---------------------------------------------------------------------------
# Writing SL_2 matrices as words (Euclidean algorithm)
# ---------------------------------------------------------------------------


def _diagonal_power(d: int, e) -> int | None:
    """k with diag(w0^k, w0^-k) = diag(e, e^-1) up to sign, for the diagonal generator."""
    R = quad_ring(d)
    if d == 1:
        return 0 if e in ((1, 0), (-1, 0)) else 1
    if d == 3:
        w = (0, 1)
        x = (1, 0)
        for k in range(6):
            if x == e or R.neg(x) == e:
                return k % 3
            x = R.mul(x, w)
    return 0 if e in ((1, 0), (-1, 0)) else None


def express_in_generators(M: Mat2, P: GroupPresentation) -> Word:
    """A word in the PSL generators that evaluates to +-M (det M must be 1).

    Uses the roles 'a' = (0 -1; 1 0), 't' = (1 1; 0 1), 'u' = (1 w; 0 1) and,
    for d = 1, 3, the diagonal generator 'l'.
    """
    R = quad_ring(P.d)
    if M.det() != (1, 0):
        raise ValueError("express_in_generators needs a determinant-one matrix")
    a, t, u = (P.index(P.roles[k]) for k in ("a", "t", "u"))
    prefix: list = []   # prefix word W with W * M = current
    cur = M
    A = P.matrices[a]

    def translate(x):
        # (1 x; 0 1) = t^m u^n for x = m + n w
        return [(t, x[0]), (u, x[1])]

    while cur.entries[2] != (0, 0):
        p, _, r, _ = cur.entries
        q, _ = R.divmod(p, r)
        if q != (0, 0):
            # T(-q) * cur
            step = translate(R.neg(q))
            prefix = step + prefix
            cur = Mat2(1, R.neg(q), 0, 1, P.d) * cur
        prefix = [(a, 1)] + prefix
        cur = A * cur
    e, x, _, f = cur.entries
    # cur = diag(e, f) (1, f x; 0, 1) since e f = 1
    tail = translate(R.mul(f, x))
    k = _diagonal_power(P.d, e)
    if k is None:
        raise ValueError("unexpected diagonal unit")
    diag = [(P.index(P.roles["l"]), k)] if k else []
    # M = prefix^-1 * diag * tail
    w = reduce_word(list(invert_word(reduce_word(prefix))) + diag + tail)
    check = evaluate_word(w, P)
    if check.projective_key() != M.projective_key():
        raise AssertionError("word decomposition failed")
    return w


def derive_pgl(psl: GroupPresentation) -> GroupPresentation:
    """PGL_2(O_d) = PSL_2(O_d) x| <delta> with delta = diag(eps, 1), eps a non-square unit."""
    d = psl.d
    R = quad_ring(d)
    eps = (0, 1) if d == 1 else (-1, 0)
    delta = Mat2(eps, 0, 0, 1, d)
    names = psl.names + ["delta"]
    mats = psl.matrices + [delta]
    n = len(psl.names)
    out = GroupPresentation(group_id(d, "PGL"), d, "PGL", names, mats, list(psl.relators),
                            dict(psl.roles, delta="delta"),
                            "semidirect product of the PSL presentation with delta = diag(eps, 1)")

    def normalise(M):
        # scale by a unit so that the determinant is 1
        det = M.det()
        for lam in R.units:
            if R.mul(R.mul(lam, lam), det) == (1, 0):
                return M.scale(lam)
        raise ValueError("element is not in the image of SL_2")

    sq = normalise(delta * delta)
    w = express_in_generators(sq, psl)
    out.relators.append(reduce_word([(n, 2)] + list(invert_word(w))))
    dinv = delta.inverse()
    for g in range(n):
        conj = delta * psl.matrices[g] * dinv
        w = express_in_generators(conj, psl)
        out.relators.append(reduce_word([(n, 1), (g, 1), (n, -1)] + list(invert_word(w))))
    return out.validate()


# ---------------------------------------------------------------------------
# Cell complexes
# ---------------------------------------------------------------------------


@dataclass
class Cell:
    name: str
    stabilizer: list[Word]       # words in the complex's element names
    label: str
    ends: tuple[str, str] | None = None


@dataclass
class Identification:
    source: str
    target: str
    element: Word
    orientation: int = 1        # target = orientation * element . source (edges)


@dataclass
class CellComplexDatum:
    gid: str
    d: int
    kind: str
    names: list[str]
    matrices: list[Mat2]
    vertices: list[Cell]
    edges: list[Cell]
    boundary: list[tuple[str, int]]
    edge_identifications: list[Identification]
    vertex_identifications: list[Identification]
    source: str = ""

    def evaluate(self, w: Word) -> Mat2:
        out = Mat2.identity(self.d)
        for g, e in w:
            base = self.matrices[g] if e > 0 else self.matrices[g].inverse()
            for _ in range(abs(e)):
                out = out * base
        return out

    def vertex(self, name):
        for v in self.vertices:
            if v.name == name:
                return v
        raise KeyError(name)

    def edge(self, name):
        for e in self.edges:
            if e.name == name:
                return e
        raise KeyError(name)

    def stabilizer_matrices(self, cell: Cell) -> list[Mat2]:
        return [self.evaluate(w) for w in cell.stabilizer]

    @property
    def edge_reps(self) -> list[Cell]:
        targets = {i.target for i in self.edge_identifications}
        return [e for e in self.edges if e.name not in targets]

    @property
    def vertex_reps(self) -> list[Cell]:
        targets = {i.target for i in self.vertex_identifications}
        return [v for v in self.vertices if v.name not in targets]

    def vertex_transport(self, name) -> tuple[str, Mat2]:
        """(representative, h) with vertex = h . representative."""
        for i in self.vertex_identifications:
            if i.target == name:
                return i.source, self.evaluate(i.element)
        return name, Mat2.identity(self.d)

    def edge_transport(self, name) -> tuple[str, Mat2, int]:
        for i in self.edge_identifications:
            if i.target == name:
                return i.source, self.evaluate(i.element), i.orientation
        return name, Mat2.identity(self.d), 1

    def validate(self):
        """Check stabilizer orders, incidences and gluings on the matrix level."""
        groups = {}
        for cell in self.vertices + self.edges:
            gens = self.stabilizer_matrices(cell)
            for M in gens:
                if not quad_ring(self.d).is_unit(M.det()):
                    raise DataError(f"{self.gid}: stabilizer of {cell.name} has non-unit determinant")
            G = closure(gens)
            want = STABILIZER_ORDERS[cell.label]
            if len(G) != want:
                raise DataError(f"{self.gid}: stabilizer of {cell.name} has order {len(G)}, expected {want} ({cell.label})")
            groups[cell.name] = G
        for e in self.edges:
            for v in e.ends:
                if not set(groups[e.name]) <= set(groups[v]):
                    raise DataError(f"{self.gid}: stabilizer of edge {e.name} does not fix vertex {v}")
        for ident in self.edge_identifications + self.vertex_identifications:
            h = self.evaluate(ident.element)
            hi = h.inverse()
            moved = {(h * x * hi).projective_key() for x in groups[ident.source].values()}
            if moved != set(groups[ident.target]):
                raise DataError(f"{self.gid}: {ident.source} -> {ident.target} gluing does not conjugate stabilizers")
        for ident in self.edge_identifications:
            src, tgt = self.edge(ident.source), self.edge(ident.target)
            ends = [self._vertex_image(v, ident.element) for v in src.ends]
            if ident.orientation < 0:
                ends = ends[::-1]
            if tuple(ends) != tgt.ends:
                raise DataError(f"{self.gid}: gluing of {ident.source} does not land on {ident.target}")
        # boundary is a closed loop
        path = []
        for name, s in self.boundary:
            a, b = self.edge(name).ends
            path.append((a, b) if s > 0 else (b, a))
        for (x, y), (z, _) in zip(path, path[1:] + path[:1]):
            if y != z:
                raise DataError(f"{self.gid}: 2-cell boundary is not a closed loop")
        return self

    def _vertex_image(self, vname, element: Word) -> str:
        """Name of the vertex h . vname according to the vertex gluings (or vname when h fixes it)."""
        h = self.evaluate(element)
        if h.is_scalar():
            return vname
        for i in self.vertex_identifications:
            g = self.evaluate(i.element)
            if i.source == vname and g.projective_key() == h.projective_key():
                return i.target
            if i.target == vname and g.inverse().projective_key() == h.projective_key():
                return i.source
        # h fixes the vertex when it lies in the vertex stabilizer
        G = closure(self.stabilizer_matrices(self.vertex(vname)))
        if h.projective_key() in G:
            return vname
        raise DataError(f"{self.gid}: cannot locate image of vertex {vname}")


def cellcomplex_from_json(gid: str, obj) -> CellComplexDatum:
    d, kind = obj["d"], obj["kind"]
    names = list(obj["elements"])
    mats = [matrix_from_json(obj["elements"][n], d) for n in names]

    def cell(c, edge=False):
        return Cell(c["name"], [parse_word(s, names) for s in c["stabilizer"]], c["label"],
                    tuple(c["ends"]) if edge else None)

    def ident(i):
        return Identification(i["source"], i["target"], parse_word(i["element"], names), int(i.get("orientation", 1)))

    return CellComplexDatum(
        gid, d, kind, names, mats,
        [cell(v) for v in obj["vertices"]],
        [cell(e, True) for e in obj["edges"]],
        [(b[0], int(b[1])) for b in obj["boundary"]],
        [ident(i) for i in obj.get("edge_identifications", [])],
        [ident(i) for i in obj.get("vertex_identifications", [])],
        obj.get("source", ""),
    )


@lru_cache(maxsize=None)
def load_cellcomplex(gid: str) -> CellComplexDatum:
    data = _shipped("cellcomplexes.json")
    if gid not in data:
        raise UnsupportedGroup(
            f"no cell complex shipped for {gid}; supply one with cellcomplex_from_file() "
            "using the schema described in the README")
    return cellcomplex_from_json(gid, data[gid]).validate()


def cellcomplex_from_file(path) -> CellComplexDatum:
    obj = json.loads(Path(path).read_text())
    gid = obj.get("group") or group_id(obj["d"], obj["kind"])
    return cellcomplex_from_json(gid, obj).validate()
