"""Turn estimated JDD / c(k) into a realizable generator target."""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .graph import DegreeClustering, JddMatrix

log = logging.getLogger(__name__)


class RepairError(RuntimeError):
    pass


@dataclass
class TargetSpec:
    jdd: JddMatrix
    ck: DegreeClustering
    n_nodes: int
    edges_changed: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def d_k(self) -> dict[int, int]:
        return {k: int(v) for k, v in self.jdd.degree_counts().items()}

    @property
    def n_edges(self) -> int:
        return int(self.jdd.total())

    @classmethod
    def from_graph(cls, g) -> "TargetSpec":
        from .graph import degree_clustering, exact_jdd
        jdd = exact_jdd(g)
        return cls(jdd=jdd, ck=degree_clustering(g), n_nodes=int(sum(jdd.degree_counts().values())))


# ---------------------------------------------------------------------------
# realizability


@dataclass
class Realizability:
    ok: bool
    violations: list = field(default_factory=list)  # (condition, key) pairs

    def __bool__(self):
        return self.ok

    @property
    def conditions(self) -> set[str]:
        return {c for c, _ in self.violations}


def _cap(k, l, dk, dl):
    return dk * (dk - 1) // 2 if k == l else dk * dl


def verify_realizability(jdd: JddMatrix) -> Realizability:
    """Check the five integer / capacity / parity conditions.

    Capacities are evaluated with ``floor(D(k))`` when D(k) is fractional, since
    only whole nodes can carry edges.
    """
    bad = []
    for kl, c in jdd.items():
        if c < 0 or not float(c).is_integer():
            bad.append(("i", kl))
    stubs = jdd.stubs()
    d = {}
    for k, s in stubs.items():
        if not float(s).is_integer() or int(s) % k:
            bad.append(("ii", k))
        d[k] = math.floor(s / k + 1e-9)
    for (k, l), c in jdd.items():
        if c > _cap(k, l, d[k], d[l]):
            bad.append(("iii" if k != l else "iv", (k, l)))
    for k, s in stubs.items():
        off = s - 2 * jdd[k, k]
        if float(s).is_integer() and int(s) % k == 0 and (k * (int(s) // k) - off) % 2:
            bad.append(("v", k))
    return Realizability(not bad, bad)


def _pick_partner(k, pool: Counter, rows: dict, cap_ok, rng, need_mass=False, overfull=None):
    """Partner class for a stub of class ``k``: most existing mass first, then nearest degree.

    With ``overfull``, entries above their capacity are preferred over everything else.
    """
    best, best_key = None, None
    row = rows.get(k, {})
    for l, n in pool.items():
        if n <= 0 or (l == k and n < 2):
            continue
        mass = row.get(l, 0)
        if need_mass and mass <= 0:
            continue
        if cap_ok is not None and not cap_ok(k, l):
            continue
        key = (bool(overfull and overfull(k, l)), mass, -abs(l - k), rng.random())
        if best_key is None or key > best_key:
            best, best_key = l, key
    return best


class _Repairer:
    def __init__(self, jdd: JddMatrix, rng: np.random.Generator, rounding: str):
        self.rows: dict[int, dict[int, int]] = {}
        self.rng = rng
        self.rounding = rounding
        self.force_down: set[int] = set()  # classes whose up-rounding did not fit under caps
        self.force_up: set[int] = set()    # classes that need one more node to fit their entries
        self.target_d: dict[int, int] = {}
        for (k, l), c in jdd.items():
            if c:
                self.add(k, l, int(c))

    @property
    def J(self) -> dict:
        return {(k, l): c for k, row in self.rows.items() for l, c in row.items() if k <= l}

    def get(self, k, l) -> int:
        return self.rows.get(k, {}).get(l, 0)

    def add(self, k, l, n=1):
        v = self.get(k, l) + n
        if v < 0:
            raise RepairError(f"internal: negative entry at {(k, l)}")
        for a, b in ((k, l), (l, k)):
            row = self.rows.setdefault(a, {})
            if v:
                row[b] = v
            else:
                row.pop(b, None)
                if not row:
                    del self.rows[a]

    def stubs(self) -> Counter:
        return Counter({k: sum(row.values()) + row.get(k, 0) for k, row in self.rows.items()})

    def partner_with_mass(self, k, exclude=()):
        """Some class m != k with J(k, m) > 0, largest mass first."""
        best, bm = None, 0
        for m, c in self.rows.get(k, {}).items():
            if m != k and m not in exclude and c > bm:
                best, bm = m, c
        return best

    def fix_integrality(self):
        stubs = self.stubs()
        up, down = Counter(), Counter()
        target_d = {}
        for k in sorted(stubs):
            s = stubs[k]
            r = s % k
            grow = k in self.force_up and k not in self.force_down
            if r == 0 and not grow:
                target_d[k] = s // k
                continue
            if r == 0:
                up[k] += k
                target_d[k] = s // k + 1
                continue
            frac = r / k
            go_up = (self.rng.random() < frac) if self.rounding == "stochastic" else frac >= 0.5
            if (go_up or grow) and k not in self.force_down:
                up[k] += k - r
                target_d[k] = s // k + 1
            else:
                down[k] += r
                target_d[k] = s // k
        self.force_up.clear()
        if (sum(up.values()) - sum(down.values())) % 2:
            self._fix_handshake(stubs, up, down, target_d)

        self.target_d = target_d

        def cap_ok(k, l):
            return self.get(k, l) < self.target_cap(k, l)

        self._pair_up(up, cap_ok)
        self._pair_down(down)
        # one up stub and one down stub left: move one edge end from q to p
        p = next((k for k, n in up.items() if n), None)
        q = next((k for k, n in down.items() if n), None)
        if p is not None and q is not None:
            m = self.partner_with_mass(q) or q
            self.add(q, m, -1)
            self.add(p, m, 1)
            up[p] -= 1
            down[q] -= 1
        if any(up.values()) or any(down.values()):
            raise RepairError("internal: unpaired stubs after integrality pass")

    def _fix_handshake(self, stubs, up, down, target_d):
        """Make the degree sum even by the cheapest change of one odd class's node count."""
        options = []
        for k in sorted(stubs):
            if k % 2 == 0:
                continue
            r = stubs[k] % k
            if up[k]:
                options.append((abs(k - 2 * r), k, "to_down"))
                options.append((k, k, "add_node"))
            elif down[k]:
                # undoing a forced round-down is a last resort
                penalty = 0 if k not in self.force_down else 10 * k
                options.append((abs(k - 2 * r) + penalty, k, "to_up"))
                if target_d[k] >= 1:
                    options.append((k, k, "drop_node"))
            else:
                options.append((k, k, "add_node"))
                if target_d[k] >= 1:
                    options.append((k, k, "drop_node"))
        _, k, how = min(options)
        r = stubs[k] % k
        if how == "to_down":
            del up[k]
            down[k] += r
            target_d[k] -= 1
        elif how == "to_up":
            del down[k]
            up[k] += k - r
            target_d[k] += 1
        elif how == "add_node":
            up[k] += k
            target_d[k] += 1
        else:
            down[k] += k
            target_d[k] -= 1

    def _pair_up(self, up: Counter, cap_ok):
        while True:
            live = [k for k, n in up.items() if n > 0]
            if not live or (len(live) == 1 and up[live[0]] < 2):
                return
            k = max(live, key=lambda k: up[k])
            l = _pick_partner(k, up, self.rows, cap_ok, self.rng)
            if l is None and up[k] >= 2 and self._split_edge(k, cap_ok):
                up[k] -= 2
                continue
            if l is None:
                self.force_down.add(k)
                l = _pick_partner(k, up, self.rows, None, self.rng)
            up[k] -= 1
            up[l] -= 1
            self.add(k, l, 1)

    def _split_edge(self, k, cap_ok) -> bool:
        """Give class k two stubs by replacing an edge (m, m2) with (k, m) and (k, m2)."""
        best = None
        for m, row in self.rows.items():
            if m == k or not cap_ok(k, m):
                continue
            for m2, c in row.items():
                if m2 == k or m2 < m:
                    continue
                if m2 == m:
                    ok = self.get(k, m) + 1 < self.target_cap(k, m)
                else:
                    ok = cap_ok(k, m2)
                if ok and (best is None or c > best[0]):
                    best = (c, m, m2)
        if best is None:
            return False
        _, m, m2 = best
        self.add(m, m2, -1)
        self.add(k, m, 1)
        self.add(k, m2, 1)
        return True

    def target_cap(self, k, l) -> int:
        return _cap(k, l, self.target_d.get(k, 0), self.target_d.get(l, 0))

    def _pair_down(self, down: Counter):
        while True:
            live = [k for k, n in down.items() if n > 0]
            if not live or (len(live) == 1 and down[live[0]] < 2):
                return
            k = max(live, key=lambda k: down[k])
            l = _pick_partner(k, down, self.rows, None, self.rng, need_mass=True,
                              overfull=lambda a, b: self.get(a, b) > self.target_cap(a, b))
            direct = l is not None
            if not direct:
                l = _pick_partner(k, down, self.rows, None, self.rng)
            down[k] -= 1
            down[l] -= 1
            if direct:
                self.add(k, l, -1)
            else:
                self._remove_indirect(k, l)

    def _reconnect_ends(self, k, l):
        """Best (m, m2) for dropping (k, m) and (l, m2) and adding (m, m2), or None.

        Requires room in the reconnected entry when any choice has it, then
        prefers removals from entries above their capacity, then the heaviest.
        """
        def over(a, b):
            return self.get(a, b) > self.target_cap(a, b)

        best, best_key = None, None
        rk = [(m, c) for m, c in self.rows.get(k, {}).items() if m not in (k, l)]
        rl = [(m, c) for m, c in self.rows.get(l, {}).items() if m not in (k, l)]
        for m, c in rk:
            for m2, c2 in rl:
                if k == l and m == m2 and c < 2:
                    continue
                after = self.get(m, m2) + 1
                key = (after <= self.target_cap(m, m2), over(k, m) + over(l, m2), c + c2)
                if best_key is None or key > best_key:
                    best, best_key = (m, m2), key
        return best

    def _remove_indirect(self, k, l):
        """Take one stub from each of k and l when J(k, l) = 0, keeping all other rows intact."""
        pair = self._reconnect_ends(k, l)
        if pair is not None:
            # drop (k,m) and (l,m2), reconnect the freed ends as (m, m2)
            m, m2 = pair
            self.add(k, m, -1)
            self.add(l, m2, -1)
            self.add(m, m2, 1)
            return
        if k == l:
            # reached only with J(k, k) = 0, so two stubs of k always sit on off-diagonal entries
            raise RepairError(f"internal: cannot remove two stubs from class {k}")
        m = self.partner_with_mass(k, exclude=(l,))
        m2 = self.partner_with_mass(l, exclude=(k,))
        if m is None and m2 is not None:
            self.add(k, k, -1)
            self.add(l, m2, -1)
            self.add(k, m2, 1)
        elif m2 is None and m is not None:
            self.add(l, l, -1)
            self.add(k, m, -1)
            self.add(l, m, 1)
        else:
            self.add(k, k, -1)
            self.add(l, l, -1)
            self.add(k, l, 1)

    def _relocate(self, k, l, d) -> bool:
        """Move one edge off the full entry (k, l) without touching any class's stub count.

        Applies J(k,l)-1, J(m,l2)-1, J(k,l2)+1, J(m,l)+1 for the first (m, l2)
        that leaves every touched entry within its cap.
        """
        def fits(a, b):
            return self.get(a, b) <= _cap(a, b, d.get(a, 0), d.get(b, 0))

        for kk, ll in ((k, l), (l, k)):
            for m in sorted(self.rows, key=lambda m: abs(m - kk)):
                if m == kk:
                    continue
                for l2 in list(self.rows[m]):
                    if l2 == ll or self.get(kk, l2) >= _cap(kk, l2, d.get(kk, 0), d.get(l2, 0)) \
                            or self.get(m, ll) >= _cap(m, ll, d.get(m, 0), d.get(ll, 0)):
                        continue
                    moves = ((kk, ll, -1), (m, l2, -1), (kk, l2, 1), (m, ll, 1))
                    for a, b, s in moves:
                        self.add(a, b, s)
                    if all(fits(a, b) for a, b, _ in moves):
                        return True
                    for a, b, s in reversed(moves):
                        self.add(a, b, -s)
        return False

    def fix_caps(self) -> int:
        """Bring entries under their caps.

        An entry over its cap first tries to move edges elsewhere; failing that,
        if one more node in the smaller class would make it fit, that class is
        marked to round up on the next pass; otherwise the excess is trimmed.
        """
        stubs = self.stubs()
        d = {k: s // k for k, s in stubs.items()}
        trimmed = 0
        for (k, l), c in list(self.J.items()):
            cap = _cap(k, l, d.get(k, 0), d.get(l, 0))
            while self.get(k, l) > cap and self._relocate(k, l, d):
                pass
            c = self.get(k, l)
            if c <= cap:
                continue
            grow = min(k, l)
            bigger = dict(d)
            bigger[grow] = d.get(grow, 0) + 1
            if grow not in self.force_down and c <= _cap(k, l, bigger.get(k, 0), bigger.get(l, 0)):
                self.force_up.add(grow)
                continue
            self.add(k, l, cap - c)
            trimmed += c - cap
            self.force_down.update((k, l))
        return trimmed


def repair_realizability(jdd: JddMatrix, seed: int = 0, *, ck: DegreeClustering | None = None,
                         rounding: str = "stochastic", max_rounds: int = 100) -> TargetSpec:
    """Minimally modify an integer JDD so that some simple graph realizes it.

    Order per round: make every D(k) integral (rounding up or down as chosen by
    ``rounding``), then bring entries above their capacity back under it, by
    moving edges to entries with room where possible and trimming otherwise;
    repeat until the matrix verifies. Parity of the diagonal holds by
    construction under the single-count convention.
    """
    if not len(jdd):
        raise RepairError("empty JDD matrix")
    if not jdd.is_integral():
        raise ValueError("repair_realizability expects an integer matrix; round it first")
    if rounding not in ("stochastic", "nearest"):
        raise ValueError(f"unknown rounding mode {rounding!r}")
    original = {kl: int(c) for kl, c in jdd.items()}
    rep = _Repairer(jdd, np.random.default_rng(seed), rounding)
    for _ in range(max_rounds):
        check = verify_realizability(JddMatrix(rep.J))
        if check.ok:
            break
        rep.fix_integrality()
        rep.fix_caps()
    else:
        raise RepairError(f"no realizable matrix after {max_rounds} rounds: "
                          f"{verify_realizability(JddMatrix(rep.J)).violations[:5]}")
    if not rep.J:
        raise RepairError("repair emptied the matrix (all mass sat on capped entries)")
    out = JddMatrix()
    out.entries = dict(rep.J)
    changed = sum(abs(out[kl] - original.get(kl, 0)) for kl in set(original) | set(out.entries))
    spec_ck = {}
    present = set(out.degrees())
    if ck:
        dropped = sorted(k for k in ck if k not in present)
        if dropped:
            log.warning("dropping c(k) for %d degrees absent from the repaired JDD", len(dropped))
        spec_ck = {k: float(v) for k, v in ck.items() if k in present}
    n = int(sum(out.degree_counts().values()))
    return TargetSpec(jdd=out, ck=spec_ck, n_nodes=n, edges_changed=int(changed),
                      notes={"input_mass": int(sum(original.values()))})


# ---------------------------------------------------------------------------
# smoothing and rounding


def _ordered_counts(jdd: JddMatrix):
    """Symmetric edge-end matrix (diagonal doubled) on the rank grid of observed degrees."""
    degrees = jdd.degrees()
    index = {k: i for i, k in enumerate(degrees)}
    O = np.zeros((len(degrees), len(degrees)))
    for (k, l), c in jdd.items():
        i, j = index[k], index[l]
        if i == j:
            O[i, i] += 2 * c
        else:
            O[i, j] += c
            O[j, i] += c
    return degrees, O


def scott_bandwidth(jdd: JddMatrix) -> float:
    """Scott's rule for a 2-d sample, sigma * m^(-1/6), in units of degree rank.

    sigma is the spread of the edge ends over the rank grid and m the total edge mass.
    """
    if jdd.total() <= 0:
        return 0.0
    _, O = _ordered_counts(jdd)
    w = O.sum(axis=1)
    pos = np.arange(len(w), dtype=float)
    mean = np.average(pos, weights=w)
    sigma = math.sqrt(np.average((pos - mean) ** 2, weights=w))
    return sigma * jdd.total() ** (-1.0 / 6.0)


def smooth_jdd(jdd: JddMatrix, bandwidth: float | None = None, *, min_degrees: int = 10) -> JddMatrix:
    """Gaussian kernel smoothing of the JDD over the observed degrees.

    The kernel runs over degree *ranks*, so mass only moves between degrees
    that were actually seen; spreading it onto unseen small degrees would
    later turn into many spurious low-degree nodes. Works on ordered edge-end
    counts (diagonal doubled) so total mass and symmetry are preserved; the
    kernel is truncated at three bandwidths and reflected at the borders.
    """
    if len(jdd) <= 1:
        return jdd.copy()
    if bandwidth is None:
        if len(jdd.degrees()) <= min_degrees:
            log.info("smoothing skipped: only %d distinct degrees", len(jdd.degrees()))
            return jdd.copy()
        bandwidth = scott_bandwidth(jdd)
    if bandwidth <= 0:
        return jdd.copy()
    degrees, O = _ordered_counts(jdd)
    S = gaussian_filter(O, sigma=bandwidth, mode="reflect", truncate=3.0)
    S = 0.5 * (S + S.T)
    S[S < 0] = 0.0
    total = S.sum()
    if total <= 0:
        return jdd.copy()
    S *= O.sum() / total
    out = JddMatrix()
    ks, ls = np.nonzero(np.triu(S) > 0)
    for i, j in zip(ks.tolist(), ls.tolist()):
        v = S[i, j] / 2 if i == j else S[i, j]
        out.entries[(degrees[i], degrees[j])] = float(v)
    return out


def stochastic_round(jdd: JddMatrix, seed: int) -> JddMatrix:
    """x -> floor(x) + Bernoulli(x - floor(x)), entry-wise."""
    rng = np.random.default_rng(seed)
    keys = sorted(jdd.entries)
    vals = np.array([jdd.entries[k] for k in keys], dtype=float)
    if (vals < 0).any():
        raise ValueError("negative JDD entry")
    base = np.floor(vals)
    rounded = base + (rng.random(len(vals)) < (vals - base))
    out = JddMatrix()
    out.entries = {k: int(v) for k, v in zip(keys, rounded.tolist()) if v > 0}
    return out


def build_target(jdd: JddMatrix, ck: DegreeClustering, seed: int = 0, *, smooth: bool = True,
                 rounding: str = "stochastic") -> TargetSpec:
    """Smooth -> stochastically round -> repair."""
    m = smooth_jdd(jdd) if smooth else jdd
    r = jdd if jdd.is_integral() and not smooth else stochastic_round(m, seed)
    return repair_realizability(r, seed=seed, ck=ck, rounding=rounding)


# ---------------------------------------------------------------------------
# file format


def write_target(spec: TargetSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"N {spec.n_nodes}\n")
        fh.write(f"# edges_changed {spec.edges_changed}\n")
        fh.write("[jdd]\n")
        for (k, l), c in sorted(spec.jdd.items()):
            fh.write(f"{k} {l} {int(c)}\n")
        fh.write("[ck]\n")
        for k, v in sorted(spec.ck.items()):
            fh.write(f"{k} {float(v)!r}\n")


def read_target(path) -> TargetSpec:
    n = None
    changed = 0
    section = None
    jdd = JddMatrix()
    ck = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("# edges_changed"):
                changed = int(s.split()[-1])
                continue
            if s.startswith("#"):
                continue
            if s.startswith("N "):
                n = int(s.split()[1])
            elif s in ("[jdd]", "[ck]"):
                section = s
            elif section == "[jdd]":
                k, l, c = s.split()
                jdd[int(k), int(l)] = jdd[int(k), int(l)] + int(c)
            elif section == "[ck]":
                k, v = s.split()
                ck[int(k)] = float(v)
            else:
                raise ValueError(f"{path}:{lineno}: unexpected line {s!r}")
    if n is None:
        raise ValueError(f"{path}: missing 'N' header")
    return TargetSpec(jdd=jdd, ck=ck, n_nodes=n, edges_changed=changed)
