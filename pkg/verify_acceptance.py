#!/usr/bin/env python3
"""
Acceptance Verification Script

Runs every acceptance criterion of the identical-particles lab, through the
idlab command-line driver where a subcommand exists and through the library
otherwise, and prints a PASS/FAIL summary. Exit code 0 when everything passes.
"""

import json
import logging
import math
import sys
import time
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from click.testing import CliRunner
from pydantic import ValidationError

from src.Services.cli.commands import LOG_FORMAT, cli
from src.Services.cli.models import RESULT_MODELS, ReportEnvelope
from src.Services.counting.microstates import count_orbits, enumerate_microstates, gibbs_check
from src.Services.counting.models import LevelSpec
from src.Services.hilbert.hilbert_space import RandomSpec, StateVector, apply, max_deviation, random_state
from src.Services.permutation.permutator import (
    n_antisymmetrizer,
    n_symmetrizer,
    permutator,
    subspace_dimension,
)
from src.Services.scenarios.gaussian import gaussian_overlap, gaussian_overlap_quadrature
from src.Services.scenarios.models import GaussianSpec
from src.Services.scenarios.spin import singlet, spin_differentiating


class AcceptanceTester:
    def __init__(self):
        self.runner = CliRunner()
        self.results: List[Dict[str, Any]] = []

    def run_command(self, args: Sequence[str], expected_exit: int = 0) -> Dict[str, Any]:
        """Invoke one idlab subcommand in-process and record the outcome"""
        print(f"Running idlab {' '.join(args)}")
        started = time.perf_counter()
        outcome = self.runner.invoke(cli, list(args))
        result = {
            "name": " ".join(args),
            "exit_code": outcome.exit_code,
            "elapsed_ms": (time.perf_counter() - started) * 1000,
            "success": outcome.exit_code == expected_exit,
        }
        try:
            result["report"] = json.loads(outcome.stdout)
        except (json.JSONDecodeError, ValueError):
            result["report"] = None
        if not result["success"]:
            result["message"] = f"exit {outcome.exit_code}, expected {expected_exit}"
        elif result["report"] is not None and args[0] in RESULT_MODELS:
            try:
                ReportEnvelope.parse_obj(result["report"])
                RESULT_MODELS[args[0]].parse_obj(result["report"]["results"])
            except ValidationError as e:
                result["success"] = False
                result["message"] = f"report does not match the published schema: {e}"
        return result

    def run_check(self, name: str, check: Callable[[], Optional[str]]) -> Dict[str, Any]:
        """Run a library-level check; it returns None on success or a failure message"""
        print(f"Checking {name}")
        started = time.perf_counter()
        try:
            message = check()
        except Exception as e:
            message = f"{type(e).__name__}: {e}"
        result = {
            "name": name,
            "elapsed_ms": (time.perf_counter() - started) * 1000,
            "success": message is None,
        }
        if message:
            result["message"] = message
        return result

    def record(self, result: Dict[str, Any]) -> None:
        self.results.append(result)
        if result["success"]:
            print(f"   ✅ ok ({result['elapsed_ms']:.1f}ms)")
        else:
            print(f"   ❌ Failed: {result.get('message', 'Unknown error')}")

    # -------------------------- Criteria -------------------------- #

    def run_symmetry_tests(self):
        print("🧪 Permutator and projector identities")
        print("=" * 50)
        for dim in range(2, 7):
            self.record(self.run_command(["axioms", "--dim", str(dim), "--trials", "50", "--seed", "7"]))
        self.record(self.run_command(["axioms", "--dim", "1"], expected_exit=2))
        self.record(self.run_check("N-particle projector traces (d <= 4, n <= 4)", _n_particle_traces))

    def run_equivalence_tests(self):
        print("\n🔗 Equivalence of identical and different particles")
        print("=" * 50)
        for dim in (2, 4, 8):
            for stats in ("bose", "fermi"):
                self.record(self.run_command(
                    ["equivalence", "--dim", str(dim), "--trials", "1000", "--seed", "1", "--stats", stats]
                ))
        self.record(self.run_command(
            ["fapp", "--dim", "4", "--overlaps", "1e-1,1e-2,1e-3,1e-4", "--trials", "200", "--seed", "3"]
        ))
        self.record(self.run_command(["fapp", "--overlaps", "1e-1,1e-2"], expected_exit=2))

    def run_counting_tests(self):
        print("\n🔢 State counting")
        print("=" * 50)
        hydrogen = self.run_command(["count", "--demo", "hydrogen"])
        report = hydrogen.get("report") or {}
        counts = report.get("results", {})
        if hydrogen["success"] and (counts.get("W_dist"), counts.get("W_ident")) != (4, 2):
            hydrogen["success"] = False
            hydrogen["message"] = f"expected W_dist=4, W_ident=2, got {counts.get('W_dist')}, {counts.get('W_ident')}"
        self.record(hydrogen)
        self.record(self.run_command(["entropy", "--demo", "hydrogen"]))
        self.record(self.run_command(["count", "--levels", "three.json", "--particles", "3", "--energy", "6"]))
        self.record(self.run_command(["count", "--levels", "three.json", "--particles", "9", "--energy", "6"],
                                     expected_exit=2))
        self.record(self.run_command(["entropy", "--levels", "three.json", "--particles", "3", "--energy", "6",
                                      "--extensivity"]))
        self.record(self.run_check("Gibbs factor on multiplicity-free instances", _gibbs_instances))
        self.record(self.run_check("Orbit count equals W_bose (N <= 4, M <= 4)", _orbit_consistency))

    def run_scenario_tests(self):
        print("\n🌊 Physical scenarios")
        print("=" * 50)
        self.record(self.run_check("Gaussian closed form vs quadrature", _gaussian_agreement))
        self.record(self.run_command(["gaussian", "--sep", "4", "--width", "1"]))
        self.record(self.run_command(["doublewell", "--preset", "high"]))
        self.record(self.run_command(["doublewell", "--preset", "none"]))
        self.record(self.run_command(["doublewell", "--sweep"]))
        self.record(self.run_check("Spin differentiation and singlet", _spin_and_singlet))

    def run_determinism_tests(self):
        print("\n🔁 Determinism")
        print("=" * 50)
        args = ["equivalence", "--dim", "3", "--trials", "20", "--seed", "11"]
        first = self.run_command(args)
        second = self.run_command(args)
        same = first["report"] is not None and first["report"] == second["report"]
        second["success"] = second["success"] and same
        if not same:
            second["message"] = "repeated run produced a different report"
        self.record(second)

    def print_summary(self) -> bool:
        """Print test summary"""
        print("\n📊 Acceptance Summary")
        print("=" * 50)

        total_tests = len(self.results)
        successful_tests = sum(1 for r in self.results if r["success"])

        print(f"Total Checks: {total_tests}")
        print(f"Successful: {successful_tests}")
        print(f"Failed: {total_tests - successful_tests}")
        print(f"Success Rate: {(successful_tests / total_tests) * 100:.1f}%")

        failed_tests = [r for r in self.results if not r["success"]]
        if failed_tests:
            print("\n❌ Failed Checks:")
            for test in failed_tests:
                print(f"   • {test['name']}: {test.get('message', 'Unknown error')}")
        return not failed_tests


# -------------------------- Library checks -------------------------- #

def _n_particle_traces() -> Optional[str]:
    for d, n in product(range(1, 5), range(1, 5)):
        if d**n > 256:
            continue
        expected = (math.comb(d + n - 1, n), math.comb(d, n))
        got = (subspace_dimension(n_symmetrizer(d, n)), subspace_dimension(n_antisymmetrizer(d, n)))
        if got != expected:
            return f"d={d} n={n}: traces {got}, expected {expected}"
    return None


def _gibbs_instances() -> Optional[str]:
    distinct = LevelSpec.from_values([1, 2, 4, 8, 16, 32])
    for n in range(1, 7):
        for energy in range(n, 32 * n + 1):
            check = gibbs_check(distinct, n, energy)
            report = check.report
            multiplicity_free = report.w_bose == report.w_fermi
            if report.w_bose and multiplicity_free != check.holds:
                return f"N={n} E={energy}: W_dist={report.w_dist}, W_bose={report.w_bose}, W_fermi={report.w_fermi}"
    counter = gibbs_check(LevelSpec.from_values([1, 1]), 2, 2)
    if counter.holds or counter.witness is None:
        return "doubly occupied level not reported as a Gibbs counterexample"
    return None


def _orbit_consistency() -> Optional[str]:
    levels = LevelSpec.from_values([1, 2, 2, 3])
    for n in range(1, 5):
        for energy in range(n, 3 * n + 1):
            report = enumerate_microstates(levels, n, energy)
            orbits = count_orbits(levels, n, energy)
            if orbits != report.w_bose:
                return f"N={n} E={energy}: {orbits} orbits vs W_bose={report.w_bose}"
    return None


def _gaussian_agreement() -> Optional[str]:
    for ratio in (0, 1, 2, 4, 8):
        spec = GaussianSpec(separation=float(ratio), sigma=1.0)
        gap = abs(gaussian_overlap(spec) - gaussian_overlap_quadrature(spec))
        if gap > 1e-8:
            return f"D/sigma={ratio}: closed form and quadrature differ by {gap:.2e}"
    if abs(gaussian_overlap(GaussianSpec(separation=4.0, sigma=1.0)) - math.exp(-2)) > 1e-8:
        return "D=4 sigma=1 overlap is not e^-2"
    return None


def _spin_and_singlet() -> Optional[str]:
    for t in range(100):
        psi = random_state(3, RandomSpec(seed=5, stream_index=2 * t))
        phi = random_state(3, RandomSpec(seed=5, stream_index=2 * t + 1))
        magnitude = spin_differentiating(psi, phi).magnitude
        if magnitude > 1e-15:
            return f"trial {t}: spin overlap {magnitude:.2e}"
    state = singlet().vector
    swapped = apply(permutator(2), state)
    if max_deviation(swapped, StateVector(-state.amplitudes)) > 1e-12:
        return "singlet is not antisymmetric"
    expected = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)
    if max_deviation(state.amplitudes, expected) > 1e-12:
        return "singlet components differ from (0, 1/sqrt2, -1/sqrt2, 0)"
    return None


def main() -> int:
    # Logs go to the real stderr, never into the captured report stream
    logging.basicConfig(level=logging.WARNING, format=LOG_FORMAT, stream=sys.__stderr__)

    print("🚀 Identical Particles Lab Acceptance Verification")
    print("=" * 60)

    tester = AcceptanceTester()
    tester.run_symmetry_tests()
    tester.run_equivalence_tests()
    tester.run_counting_tests()
    tester.run_scenario_tests()
    tester.run_determinism_tests()
    return 0 if tester.print_summary() else 1


if __name__ == "__main__":
    raise SystemExit(main())
