"""Two-track leaderboard ranking.

Fidelity track: dense per-metric ranks (PSNR and SSIM descending, LPIPS
ascending; metric ties broken by team name so ranks are a permutation of
1..N), fidelity score = arithmetic mean of the three ranks, final order
ascending by score with higher PSNR then team name breaking ties.
Perceptual track: descending MOS, ties broken by team name.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .errors import MissingMetric, MissingMos

CSV_HEADER = ["team", "psnr", "ssim", "lpips", "mos",
              "psnr_rank", "ssim_rank", "lpips_rank",
              "fidelity_rank", "perceptual_rank"]


@dataclass(frozen=True)
class LeaderboardRow:
    team: str
    psnr_db: float
    ssim: float
    lpips: float
    mos: float | None = None
    psnr_rank: int | None = None
    ssim_rank: int | None = None
    lpips_rank: int | None = None
    fidelity_score: float | None = None
    fidelity_rank: int | None = None
    perceptual_rank: int | None = None


def _require(value, team: str, metric: str) -> float:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        raise MissingMetric(f"team {team!r} has no {metric} value")
    return float(value)


def _dense_ranks(teams, values, descending: bool) -> dict:
    """Rank 1..N per metric; equal values ordered by team name."""
    order = sorted(
        range(len(teams)),
        key=lambda i: ((-values[i] if descending else values[i]), teams[i]),
    )
    return {teams[i]: rank for rank, i in enumerate(order, start=1)}


def fidelity_rank(entries) -> list:
    """Rank (team, psnr, ssim, lpips) tuples on the fidelity track.

    Returns LeaderboardRows in final rank order with per-metric ranks,
    fidelity score, and fidelity_rank populated.
    """
    if not entries:
        raise MissingMetric("no entries to rank")
    teams = [str(t) for t, *_ in entries]
    if len(set(teams)) != len(teams):
        raise ValueError("duplicate team names")
    psnrs = [_require(p, t, "psnr") for t, p, _, _ in entries]
    ssims = [_require(s, t, "ssim") for t, _, s, _ in entries]
    lpipss = [_require(l, t, "lpips") for t, _, _, l in entries]
    pr = _dense_ranks(teams, psnrs, descending=True)
    sr = _dense_ranks(teams, ssims, descending=True)
    lr = _dense_ranks(teams, lpipss, descending=False)
    scores = {t: (pr[t] + sr[t] + lr[t]) / 3.0 for t in teams}
    by_team = {t: (psnrs[i], ssims[i], lpipss[i]) for i, t in enumerate(teams)}
    final = sorted(teams, key=lambda t: (scores[t], -by_team[t][0], t))
    return [
        LeaderboardRow(
            team=t,
            psnr_db=by_team[t][0],
            ssim=by_team[t][1],
            lpips=by_team[t][2],
            psnr_rank=pr[t],
            ssim_rank=sr[t],
            lpips_rank=lr[t],
            fidelity_score=scores[t],
            fidelity_rank=rank,
        )
        for rank, t in enumerate(final, start=1)
    ]


def perceptual_rank(entries) -> list:
    """Rank (team, mos) tuples by descending MOS; returns (team, mos, rank)."""
    if not entries:
        raise MissingMos("no entries to rank")
    teams = [str(t) for t, _ in entries]
    if len(set(teams)) != len(teams):
        raise ValueError("duplicate team names")
    moses = {t: _mos_value(m, t) for t, m in entries}
    order = sorted(teams, key=lambda t: (-moses[t], t))
    return [(t, moses[t], rank) for rank, t in enumerate(order, start=1)]


def _mos_value(value, team: str) -> float:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        raise MissingMos(f"team {team!r} has no MOS value")
    return float(value)


def build_leaderboard(metric_entries, mos_entries=None) -> list:
    """Merge both tracks into final LeaderboardRows, fidelity order."""
    rows = fidelity_rank(metric_entries)
    if mos_entries is None:
        return rows
    perceptual = {t: (m, r) for t, m, r in perceptual_rank(mos_entries)}
    merged = []
    for row in rows:
        mos, rank = perceptual.get(row.team, (None, None))
        merged.append(LeaderboardRow(
            team=row.team, psnr_db=row.psnr_db, ssim=row.ssim, lpips=row.lpips,
            mos=mos, psnr_rank=row.psnr_rank, ssim_rank=row.ssim_rank,
            lpips_rank=row.lpips_rank, fidelity_score=row.fidelity_score,
            fidelity_rank=row.fidelity_rank, perceptual_rank=rank,
        ))
    return merged


def _fmt(value, decimals: int) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return f"{value:.{decimals}f}"


def emit_leaderboard(rows, path) -> None:
    """Write the final CSV: 3 decimals for PSNR, 4 for SSIM/LPIPS, 2 for MOS."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([
                r.team,
                _fmt(r.psnr_db, 3),
                _fmt(r.ssim, 4),
                _fmt(r.lpips, 4),
                _fmt(r.mos, 2),
                r.psnr_rank, r.ssim_rank, r.lpips_rank,
                r.fidelity_rank,
                "" if r.perceptual_rank is None else r.perceptual_rank,
            ])


def read_metrics_csv(path) -> list:
    """Read (team, psnr, ssim, lpips) tuples; header `team,psnr,ssim,lpips`."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"team", "psnr", "ssim", "lpips"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise MissingMetric(f"{path}: header must contain {sorted(required)}")
        return [
            (row["team"], float(row["psnr"]), float(row["ssim"]), float(row["lpips"]))
            for row in reader
        ]


def read_mos_csv(path) -> list:
    """Read (team, mos) tuples; header `team,mos`."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"team", "mos"} <= set(reader.fieldnames):
            raise MissingMos(f"{path}: header must contain ['team', 'mos']")
        return [(row["team"], float(row["mos"])) for row in reader]