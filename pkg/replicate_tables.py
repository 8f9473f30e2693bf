#!/usr/bin/env python3
"""
Script to replicate the published core-membership fractions for n = 3, 4, 5
"""

import argparse
import os
import sys

import django

# Setup Django
sys.path.append(os.path.dirname(os.path.abspath(__file__)))
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'transport_choice.settings')
django.setup()

from django.conf import settings

from tcgame.services import ExperimentService, write_reports

# Published fractions out of 10,000 random situations per player count
PUBLISHED = {
    'I-PROP': {3: 0.9460, 4: 0.8959, 5: 0.8538},
    'M-PROP': {3: 0.0001, 4: 0.0000, 5: 0.0000},
    'SHAPLEY': {3: 0.9620, 4: 0.9303, 5: 0.8991},
    'MSE': {3: 1.0000, 4: 1.0000, 5: 1.0000},
}
BAND = 0.02


def replicate(trials, seed, workers, out=None):
    """Run every player count and print measured against published fractions"""
    service = ExperimentService(seed=seed, workers=workers, progress=True)
    reports = [service.run(n, trials) for n in (3, 4, 5)]

    print(f"\nCore-membership fractions ({trials} trials per n, seed {service.seed})")
    print(f"{'rule':<8} | {'n':>1} | {'measured':>8} | {'published':>9} | within ±{BAND}")
    print('-' * 50)
    all_within = True
    for rule, published in PUBLISHED.items():
        for report in reports:
            measured = report.fraction(rule)
            expected = published[report.n_players]
            within = abs(measured - expected) <= BAND
            all_within &= within
            print(f"{rule:<8} | {report.n_players} | {measured:8.4f} | {expected:9.4f} | {'yes' if within else 'NO'}")

    for report in reports:
        if report.nash_retries or report.superadditivity_violations:
            print(f"n={report.n_players}: {report.nash_retries} Nash retries, "
                  f"{report.superadditivity_violations} non-superadditive games")

    if out:
        write_reports(reports, out, 'json' if out.endswith('.json') else 'csv')
        print(f"Saved results to '{out}'")
    return all_within


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description=__doc__.strip())
    parser.add_argument('--trials', type=int, default=settings.TC_EXPERIMENT['TRIALS'])
    parser.add_argument('--seed', type=int, default=settings.TC_EXPERIMENT['SEED'])
    parser.add_argument('--workers', type=int, default=os.cpu_count() or 1)
    parser.add_argument('--out', help='Optional CSV or JSON report path')
    args = parser.parse_args()

    sys.exit(0 if replicate(args.trials, args.seed, args.workers, args.out) else 1)
