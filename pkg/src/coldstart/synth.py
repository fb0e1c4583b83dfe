"""Deterministic synthetic episode data with a known view-generating function.

The generator emits the same CSV schemas the ingest stage consumes plus a
ground_truth.json with every generating coefficient, so tests can verify
the whole pipeline against a closed-form target:

    views = base * genre_mult(genre_count)
                 * exp(w_rating * best_actor_rating + w_awards * log1p(actor_total_awards))
                 * decay_per_day^age_days * weekday_uplift[dow] * noise

where genre_mult is a saturating per-count lookup, noise is
lognormal(0, noise_sigma), and the aggregates are computed by the very
consolidation code the pipeline uses, guaranteeing the learning task is a
deterministic function of emitted features when noise_sigma=0.
"""

import csv
import datetime
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .ingest import consolidate_metadata, derive_date_features
from .ingest import EpisodeRow, GenreRow, PersonCredit, PlatformRow
from .util import dump_json, round_half_up

GENRE_CATALOG = (
    "action", "comedy", "crime", "documentary", "drama", "romance", "scifi", "thriller",
)
GENRE_SOURCES = ("imdb", "rotten", "fandango")

FIRST_RELEASE = datetime.date(2015, 10, 1)


@dataclass
class SynthConfig:
    n_series: int = 50
    episodes_min: int = 4
    episodes_max: int = 16
    seed: int = 42
    noise_sigma: float = 0.3
    cold_start_fraction: float = 0.0

    def __post_init__(self):
        if self.n_series < 1:
            raise DataError("n_series must be >= 1")
        if not 1 <= self.episodes_min <= self.episodes_max:
            raise DataError("need 1 <= episodes_min <= episodes_max")
        if self.noise_sigma < 0:
            raise DataError("noise_sigma must be >= 0")
        if not 0.0 <= self.cold_start_fraction <= 1.0:
            raise DataError("cold_start_fraction must be in [0, 1]")

    def to_dict(self):
        return {
            "n_series": self.n_series,
            "episodes_min": self.episodes_min,
            "episodes_max": self.episodes_max,
            "seed": self.seed,
            "noise_sigma": self.noise_sigma,
            "cold_start_fraction": self.cold_start_fraction,
        }


@dataclass
class GroundTruth:
    base_views: float = 50000.0
    w_rating: float = 0.45  # star power dominates by design
    w_awards: float = 0.5
    # saturating multiplier per distinct-genre count (1, 2, 3, ...); the
    # curvature gives tree and linear learners complementary errors
    genre_multipliers: tuple = (1.0, 1.5, 1.8, 1.95, 2.0)
    decay_per_day: float = 0.9985
    weekday_uplift: tuple = (0.95, 0.9, 0.92, 1.0, 1.1, 1.2, 1.15)  # Mon..Sun

    def genre_mult(self, genre_count):
        count = int(genre_count)
        if count <= 0:
            return 1.0
        return self.genre_multipliers[min(count, len(self.genre_multipliers)) - 1]

    def expected_views(self, best_actor_rating, actor_total_awards, genre_count, age_days, day_of_week):
        return (
            self.base_views
            * self.genre_mult(genre_count)
            * math.exp(self.w_rating * best_actor_rating + self.w_awards * math.log1p(actor_total_awards))
            * self.decay_per_day ** age_days
            * self.weekday_uplift[day_of_week]
        )

    def to_dict(self):
        return {
            "base_views": self.base_views,
            "w_rating": self.w_rating,
            "w_awards": self.w_awards,
            "genre_multipliers": list(self.genre_multipliers),
            "decay_per_day": self.decay_per_day,
            "weekday_uplift": list(self.weekday_uplift),
        }


def _format_length(minutes, style):
    hours, mins = divmod(int(minutes), 60)
    if style == 0:
        return f"{hours:02d}:{mins:02d}"
    if hours and mins:
        return f"{hours}h {mins}m"
    if hours:
        return f"{hours}h"
    return f"{mins}m"


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def generate(config, out_dir, truth=None):
    """Write episodes/credits/genres/platform CSVs and ground_truth.json.

    Same config (and truth) always produces byte-identical files. Returns
    the paths of the five written files.
    """
    truth = truth or GroundTruth()
    rng = np.random.default_rng(config.seed)
    os.makedirs(out_dir, exist_ok=True)

    episodes = []  # (EpisodeRow, raw length string) pairs
    credits = []
    genres = []
    platform = []

    for s in range(config.n_series):
        sid = f"S{s + 1:03d}"
        star_quality = float(rng.uniform(2.5, 9.0))

        n_actors = int(rng.integers(2, 6))
        n_directors = int(rng.integers(1, 3))
        n_writers = int(rng.integers(1, 4))
        for role, count in (("actor", n_actors), ("director", n_directors), ("writer", n_writers)):
            for i in range(count):
                rating = float(np.clip(rng.normal(star_quality, 0.7), 0.0, 10.0))
                awards = int(rng.poisson(3.0))
                # first actor always carries a rating so best_actor_rating
                # is never missing; other fields drop out occasionally
                if not (role == "actor" and i == 0):
                    if rng.random() < 0.1:
                        rating = None
                    if rng.random() < 0.1:
                        awards = None
                credit = PersonCredit(sid, f"{sid}-{role}-{i + 1}", role, rating, awards)
                credits.append(credit)
                if rng.random() < 0.08:  # exact duplicate rows exercise dedup
                    credits.append(credit)

        n_genres = int(rng.integers(1, 5))
        picks = rng.choice(len(GENRE_CATALOG), size=n_genres, replace=False)
        for g in sorted(int(p) for p in picks):
            source = GENRE_SOURCES[int(rng.integers(0, len(GENRE_SOURCES)))]
            genres.append(GenreRow(sid, GENRE_CATALOG[g], source))
            if rng.random() < 0.15:  # same genre from a second catalog
                other = GENRE_SOURCES[int(rng.integers(0, len(GENRE_SOURCES)))]
                genres.append(GenreRow(sid, GENRE_CATALOG[g], other))

        premiere = FIRST_RELEASE + datetime.timedelta(days=int(rng.integers(0, 365)))
        n_episodes = int(rng.integers(config.episodes_min, config.episodes_max + 1))
        for e in range(n_episodes):
            eid = f"E{e + 1:02d}"
            release = premiere + datetime.timedelta(days=7 * e)
            minutes = int(rng.integers(20, 75))
            style = int(rng.integers(0, 4))
            episodes.append(
                (EpisodeRow(sid, eid, release, float(minutes), views=None),
                 _format_length(minutes, style))
            )
            # platform metrics are marketing-side noise, deliberately
            # independent of the view formula
            metrics_row = {}
            for name, mu in (
                ("exposures", 10.5),
                ("minutes_viewed", 8.0),
                ("revenue", 7.0),
                ("audience_estimate", 9.0),
                ("impressions", 11.0),
            ):
                value = float(np.round(rng.lognormal(mu, 0.6), 2))
                metrics_row[name] = None if rng.random() < 0.15 else value
            platform.append(PlatformRow(sid, eid, **metrics_row))

    episode_rows = [ep for ep, _ in episodes]
    reference_date = max(ep.release_date for ep in episode_rows)

    # compute the generating features with the pipeline's own aggregation
    table = consolidate_metadata(episode_rows, credits, genres, platform)
    views = []
    for i, ep in enumerate(episode_rows):
        dates = derive_date_features(ep.release_date, reference_date)
        expected = truth.expected_views(
            best_actor_rating=table.column("best_actor_rating")[i],
            actor_total_awards=table.column("actor_total_awards")[i],
            genre_count=table.column("genre_count")[i],
            age_days=dates.age_days,
            day_of_week=dates.day_of_week,
        )
        noise = math.exp(float(rng.normal(0.0, config.noise_sigma))) if config.noise_sigma > 0 else 1.0
        views.append(expected * noise)

    n_holdout = min(round_half_up(config.n_series * config.cold_start_fraction), config.n_series)
    all_ids = sorted({ep.series_id for ep in episode_rows})
    holdout = sorted(
        str(x) for x in rng.choice(all_ids, size=n_holdout, replace=False)
    ) if n_holdout else []

    paths = {
        "episodes": os.path.join(out_dir, "episodes.csv"),
        "credits": os.path.join(out_dir, "credits.csv"),
        "genres": os.path.join(out_dir, "genres.csv"),
        "platform": os.path.join(out_dir, "platform.csv"),
        "ground_truth": os.path.join(out_dir, "ground_truth.json"),
    }

    _write_csv(
        paths["episodes"],
        ["series_id", "episode_id", "release_date", "length", "views"],
        [
            (ep.series_id, ep.episode_id, ep.release_date.isoformat(), raw_length, views[i])
            for i, (ep, raw_length) in enumerate(episodes)
        ],
    )
    _write_csv(
        paths["credits"],
        ["series_id", "name", "role", "imdb_rating", "awards"],
        [(c.series_id, c.name, c.role, c.imdb_rating, c.awards) for c in credits],
    )
    _write_csv(
        paths["genres"],
        ["series_id", "genre", "source"],
        [(g.series_id, g.genre, g.source) for g in genres],
    )
    _write_csv(
        paths["platform"],
        ["series_id", "episode_id", "exposures", "minutes_viewed", "revenue", "audience_estimate", "impressions"],
        [
            (p.series_id, p.episode_id, p.exposures, p.minutes_viewed, p.revenue, p.audience_estimate, p.impressions)
            for p in platform
        ],
    )
    dump_json(
        {
            "config": config.to_dict(),
            "coefficients": truth.to_dict(),
            "reference_date": reference_date.isoformat(),
            "holdout_series": holdout,
            "n_episodes": len(episode_rows),
        },
        paths["ground_truth"],
    )
    return paths
