"""Abstract conic-program container and its standard-form compilation.

A ConicProblem holds variable blocks (complex Hermitian PSD, real symmetric
PSD, nonnegative scalar, free scalar), a real linear objective, and affine
constraints.  compile() lowers everything to the solver's standard primal
form

    minimize    c' x
    subject to  A x = b,   x in K,

with K a product of free coordinates, a nonnegative orthant (declared
scalars followed by one slack per inequality), and real PSD cones in svec
coordinates.  Hermitian blocks are lowered through the real embedding, with
coefficient matrices halved so inner products are preserved (see
embedding.py).

The text dump format (one record per line, whitespace separated):

    danisac-conic 1
    constant <value>
    block <name> (psd|hermitian|nonneg|free) <side>
    obj scalar <name> <value>
    obj mat <name> <i> <j> <re> <im>      # upper triangle, i <= j
    con <label> (le|ge|eq) <rhs>
    term scalar <name> <value>
    term mat <name> <i> <j> <re> <im>
    endcon
    end

Matrix coefficients are serialized by their upper triangle; the lower
triangle is implied by symmetry (conjugate symmetry for hermitian blocks).
Values use repr-faithful decimal ("%.17g") so dump/load round-trips bits.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .embedding import hermitian_embed, hermitian_extract, smat, svec, svec_dim

_SENSE_TOKENS = {"<=": "le", ">=": "ge", "==": "eq"}
_TOKEN_SENSES = {v: k for k, v in _SENSE_TOKENS.items()}


@dataclass
class _Block:
    name: str
    kind: str
    side: int


@dataclass
class _Constraint:
    label: str
    terms: Dict[str, object]
    sense: str
    rhs: float


@dataclass
class PsdConeInfo:
    """Standard-form metadata for one (possibly embedded) PSD cone."""

    name: str
    kind: str
    orig_side: int
    emb_side: int
    cols: slice
    rows: np.ndarray = field(default=None)  # constraint rows touching this cone
    Cmats: np.ndarray = field(default=None)  # unpacked coefficients (m_b, n, n)
    Arows: np.ndarray = field(default=None)  # packed coefficients (m_b, d)


@dataclass
class CompiledConic:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    constant: float
    n_free: int
    n_nonneg: int
    psd: List[PsdConeInfo]
    row_labels: List[str]
    slack_cols: np.ndarray
    free_names: List[str]
    nonneg_names: List[str]
    scalar_cols: Dict[str, int]
    block_info: Dict[str, Tuple[str, slice, int]]

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def row_index(self, label: str) -> int:
        return self.row_labels.index(label)

    def extract(self, x: np.ndarray) -> Dict[str, object]:
        """Map a standard-form primal vector back to declared block values."""
        out: Dict[str, object] = {}
        for name, col in self.scalar_cols.items():
            out[name] = float(x[col])
        for name, (kind, cols, _side) in self.block_info.items():
            Y = smat(x[cols])
            if kind == "hermitian":
                out[name] = hermitian_extract(Y)
            else:
                out[name] = Y
        return out


def _as_coeff_matrix(block: _Block, C) -> np.ndarray:
    n = block.side
    arr = np.asarray(C)
    if arr.shape != (n, n):
        raise ValueError(
            "coefficient for block %r must be %dx%d, got %r"
            % (block.name, n, n, arr.shape)
        )
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError("non-finite coefficient for block %r" % block.name)
    if block.kind == "psd":
        if np.iscomplexobj(arr) and np.abs(arr.imag).max() > 0:
            raise ValueError("real symmetric block %r got a complex coefficient" % block.name)
        arr = arr.real.astype(float)
        dev = np.abs(arr - arr.T).max()
        if dev > 1e-10 * max(1.0, np.abs(arr).max()):
            raise ValueError("coefficient for block %r is not symmetric" % block.name)
        return 0.5 * (arr + arr.T)
    arr = arr.astype(complex)
    dev = np.abs(arr - arr.conj().T).max()
    if dev > 1e-10 * max(1.0, np.abs(arr).max()):
        raise ValueError("coefficient for block %r is not Hermitian" % block.name)
    return 0.5 * (arr + arr.conj().T)


def _as_scalar_coeff(name: str, v) -> float:
    v = complex(v)
    if v.imag != 0.0:
        raise ValueError("scalar coefficient for %r must be real" % name)
    if not np.isfinite(v.real):
        raise ValueError("non-finite coefficient for %r" % name)
    return float(v.real)


class ConicProblem:
    """Declarative container for one conic subproblem."""

    def __init__(self):
        self._blocks: Dict[str, _Block] = {}
        self._order: List[str] = []
        self._objective: Dict[str, object] = {}
        self._constant: float = 0.0
        self._constraints: List[_Constraint] = []
        self._labels: set = set()

    # -- declarations ---------------------------------------------------

    def _add_block(self, name: str, kind: str, side: int) -> str:
        if not name or any(ch.isspace() for ch in name):
            raise ValueError("block names must be nonempty and whitespace-free")
        if name in self._blocks:
            raise ValueError("duplicate block name %r" % name)
        self._blocks[name] = _Block(name, kind, side)
        self._order.append(name)
        return name

    def add_psd_block(self, name: str, side: int) -> str:
        if side < 1:
            raise ValueError("PSD block side must be >= 1")
        return self._add_block(name, "psd", int(side))

    def add_hermitian_block(self, name: str, side: int) -> str:
        if side < 1:
            raise ValueError("Hermitian block side must be >= 1")
        return self._add_block(name, "hermitian", int(side))

    def add_nonneg(self, name: str) -> str:
        return self._add_block(name, "nonneg", 0)

    def add_free(self, name: str) -> str:
        return self._add_block(name, "free", 0)

    # -- objective and constraints --------------------------------------

    def _checked_terms(self, terms) -> Dict[str, object]:
        out: Dict[str, object] = {}
        for name, coeff in terms.items():
            block = self._blocks.get(name)
            if block is None:
                raise KeyError("undeclared block %r" % name)
            if block.kind in ("nonneg", "free"):
                out[name] = _as_scalar_coeff(name, coeff)
            else:
                out[name] = _as_coeff_matrix(block, coeff)
        return out

    def set_objective(self, terms, constant: float = 0.0):
        if not np.isfinite(constant):
            raise ValueError("objective constant must be finite")
        self._objective = self._checked_terms(terms)
        self._constant = float(constant)

    def add_constraint(self, label: str, terms, sense: str, rhs: float):
        if sense not in _SENSE_TOKENS:
            raise ValueError("sense must be one of <=, >=, ==")
        if not label or any(ch.isspace() for ch in label):
            raise ValueError("constraint labels must be nonempty and whitespace-free")
        if label in self._labels:
            raise ValueError("duplicate constraint label %r" % label)
        rhs = float(rhs)
        if not np.isfinite(rhs):
            raise ValueError("constraint rhs must be finite")
        checked = self._checked_terms(terms)
        if not checked:
            raise ValueError("constraint %r references no blocks" % label)
        self._constraints.append(_Constraint(label, checked, sense, rhs))
        self._labels.add(label)

    @property
    def n_constraints(self) -> int:
        return len(self._constraints)

    # -- compilation ----------------------------------------------------

    def _coeff_svec(self, block: _Block, C: np.ndarray) -> np.ndarray:
        if block.kind == "psd":
            return svec(C)
        return svec(0.5 * hermitian_embed(C))

    def compile(self) -> CompiledConic:
        free_names = [n for n in self._order if self._blocks[n].kind == "free"]
        nonneg_names = [n for n in self._order if self._blocks[n].kind == "nonneg"]
        psd_names = [n for n in self._order if self._blocks[n].kind in ("psd", "hermitian")]

        n_free = len(free_names)
        n_nn_decl = len(nonneg_names)
        ineq_rows = [i for i, con in enumerate(self._constraints) if con.sense != "=="]
        n_slack = len(ineq_rows)
        m = len(self._constraints)

        scalar_cols: Dict[str, int] = {}
        for i, name in enumerate(free_names):
            scalar_cols[name] = i
        for i, name in enumerate(nonneg_names):
            scalar_cols[name] = n_free + i

        psd_infos: List[PsdConeInfo] = []
        block_info: Dict[str, Tuple[str, slice, int]] = {}
        col = n_free + n_nn_decl + n_slack
        for name in psd_names:
            blk = self._blocks[name]
            emb = blk.side if blk.kind == "psd" else 2 * blk.side
            d = svec_dim(emb)
            cols = slice(col, col + d)
            psd_infos.append(PsdConeInfo(name, blk.kind, blk.side, emb, cols))
            block_info[name] = (blk.kind, cols, blk.side)
            col += d
        N = col

        A = np.zeros((m, N))
        b = np.zeros(m)
        c = np.zeros(N)
        slack_cols = np.full(m, -1, dtype=int)

        for name, coeff in self._objective.items():
            blk = self._blocks[name]
            if blk.kind in ("nonneg", "free"):
                c[scalar_cols[name]] += coeff
            else:
                c[block_info[name][1]] += self._coeff_svec(blk, coeff)

        slack_i = 0
        row_labels: List[str] = []
        for r, con in enumerate(self._constraints):
            row_labels.append(con.label)
            for name, coeff in con.terms.items():
                blk = self._blocks[name]
                if blk.kind in ("nonneg", "free"):
                    A[r, scalar_cols[name]] += coeff
                else:
                    A[r, block_info[name][1]] += self._coeff_svec(blk, coeff)
            b[r] = con.rhs
            if con.sense != "==":
                scol = n_free + n_nn_decl + slack_i
                A[r, scol] = 1.0 if con.sense == "<=" else -1.0
                slack_cols[r] = scol
                slack_i += 1

        for info in psd_infos:
            sub = A[:, info.cols]
            rows = np.flatnonzero(np.any(sub != 0.0, axis=1))
            info.rows = rows
            info.Arows = np.ascontiguousarray(sub[rows])
            stack = np.zeros((rows.size, info.emb_side, info.emb_side))
            for k, r in enumerate(rows):
                stack[k] = smat(sub[r])
            info.Cmats = stack

        return CompiledConic(
            A=A,
            b=b,
            c=c,
            constant=self._constant,
            n_free=n_free,
            n_nonneg=n_nn_decl + n_slack,
            psd=psd_infos,
            row_labels=row_labels,
            slack_cols=slack_cols,
            free_names=free_names,
            nonneg_names=nonneg_names,
            scalar_cols=scalar_cols,
            block_info=block_info,
        )

    # -- text interchange -----------------------------------------------

    def dump(self) -> str:
        g = "%.17g"
        lines = ["danisac-conic 1", "constant " + g % self._constant]
        for name in self._order:
            blk = self._blocks[name]
            lines.append("block %s %s %d" % (blk.name, blk.kind, blk.side))

        def mat_lines(prefix: str, name: str, C: np.ndarray) -> List[str]:
            out = []
            n = C.shape[0]
            Cc = np.asarray(C, dtype=complex)
            for i in range(n):
                for j in range(i, n):
                    v = Cc[i, j]
                    if v != 0:
                        out.append(
                            "%s mat %s %d %d %s %s"
                            % (prefix, name, i, j, g % v.real, g % v.imag)
                        )
            return out

        def ordered(terms):
            return [(n, terms[n]) for n in self._order if n in terms]

        for name, coeff in ordered(self._objective):
            if self._blocks[name].kind in ("nonneg", "free"):
                lines.append("obj scalar %s %s" % (name, g % coeff))
            else:
                lines.extend(mat_lines("obj", name, coeff))
        for con in self._constraints:
            lines.append(
                "con %s %s %s" % (con.label, _SENSE_TOKENS[con.sense], g % con.rhs)
            )
            for name, coeff in ordered(con.terms):
                if self._blocks[name].kind in ("nonneg", "free"):
                    lines.append("term scalar %s %s" % (name, g % coeff))
                else:
                    lines.extend(mat_lines("term", name, coeff))
            lines.append("endcon")
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "ConicProblem":
        prob = cls()
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].split() != ["danisac-conic", "1"]:
            raise ValueError("not a danisac-conic dump")
        obj_scalars: Dict[str, float] = {}
        obj_mats: Dict[str, np.ndarray] = {}
        constant = 0.0
        cur: Optional[dict] = None

        def new_mat(name: str) -> np.ndarray:
            blk = prob._blocks[name]
            dtype = float if blk.kind == "psd" else complex
            return np.zeros((blk.side, blk.side), dtype=dtype)

        def set_entry(M: np.ndarray, i: int, j: int, re: float, im: float):
            if M.dtype == float:
                if im != 0.0:
                    raise ValueError("imaginary part on a real block")
                M[i, j] = re
                M[j, i] = re
            else:
                M[i, j] = re + 1j * im
                M[j, i] = re - 1j * im

        for ln in lines[1:]:
            tok = ln.split()
            kind = tok[0]
            if kind == "constant":
                constant = float(tok[1])
            elif kind == "block":
                _, name, bkind, side = tok
                side = int(side)
                if bkind == "psd":
                    prob.add_psd_block(name, side)
                elif bkind == "hermitian":
                    prob.add_hermitian_block(name, side)
                elif bkind == "nonneg":
                    prob.add_nonneg(name)
                elif bkind == "free":
                    prob.add_free(name)
                else:
                    raise ValueError("unknown block kind %r" % bkind)
            elif kind == "obj":
                if tok[1] == "scalar":
                    obj_scalars[tok[2]] = float(tok[3])
                else:
                    name = tok[2]
                    M = obj_mats.setdefault(name, new_mat(name))
                    set_entry(M, int(tok[3]), int(tok[4]), float(tok[5]), float(tok[6]))
            elif kind == "con":
                if cur is not None:
                    raise ValueError("nested con record")
                cur = {
                    "label": tok[1],
                    "sense": _TOKEN_SENSES[tok[2]],
                    "rhs": float(tok[3]),
                    "scalars": {},
                    "mats": {},
                }
            elif kind == "term":
                if cur is None:
                    raise ValueError("term outside con")
                if tok[1] == "scalar":
                    cur["scalars"][tok[2]] = float(tok[3])
                else:
                    name = tok[2]
                    M = cur["mats"].setdefault(name, new_mat(name))
                    set_entry(M, int(tok[3]), int(tok[4]), float(tok[5]), float(tok[6]))
            elif kind == "endcon":
                if cur is None:
                    raise ValueError("endcon outside con")
                terms: Dict[str, object] = {}
                terms.update(cur["scalars"])
                terms.update(cur["mats"])
                prob.add_constraint(cur["label"], terms, cur["sense"], cur["rhs"])
                cur = None
            elif kind == "end":
                break
            else:
                raise ValueError("unknown record %r" % kind)
        if cur is not None:
            raise ValueError("unterminated con record")
        terms: Dict[str, object] = {}
        terms.update(obj_scalars)
        terms.update(obj_mats)
        prob.set_objective(terms, constant)
        return prob
