"""check and extremal subcommands."""

import argparse
import logging
from typing import Optional

from delaystab.archive import open_archive, record_verdict
from delaystab.charfun import MAX_ABS_A, RootReport, count_unstable_roots
from delaystab.commands import (
    add_archive_argument,
    add_dist_arguments,
    load_distribution,
    print_json,
    require_distribution,
    spec_text,
)
from delaystab.config import Settings
from delaystab.criteria import (
    StabilityStatus,
    StabilityVerdict,
    classify_region,
    hayes_verdict,
    hopf_crossings,
    normalize,
    root_verdict,
    sufficient_test,
)
from delaystab.distributions import DiracMass, DiscreteMixture, scale_to_mean
from delaystab.errors import UsageError
from delaystab.extremal import reduce_to_extremal
from delaystab.models import (
    CheckResponse,
    ExtremalOut,
    NoCrossingOut,
    RootReportOut,
    VerdictOut,
    Witness,
    complex_pair,
)

log = logging.getLogger(__name__)


def register(sub) -> None:
    check = sub.add_parser("check", help="stability verdict for one (a, b, E)")
    check.add_argument("--a", type=float, required=True)
    check.add_argument("--b", type=float, default=1.0)
    check.add_argument("--E", type=float, help="mean delay (default: the distribution's own mean)")
    add_dist_arguments(check, required=False)
    add_archive_argument(check)
    check.set_defaults(handler=run_check)

    extremal = sub.add_parser("extremal", help="extremal {0, tau2} pair of a discrete mixture (b = 1)")
    extremal.add_argument("--a", type=float, help="instantaneous coefficient; picks the smallest Hopf crossing")
    extremal.add_argument("--omega-s", type=float, help="reduce at this frequency instead")
    extremal.add_argument("--E", type=float, help="rescale the mixture to this mean first")
    add_dist_arguments(extremal, required=True)
    extremal.set_defaults(handler=run_extremal)


def verdict_out(verdict: StabilityVerdict, scale: float = 1.0) -> VerdictOut:
    """Serialise a verdict, mapping roots and frequencies back by the time scale b.

    bound_used is always computed from the unnormalised (a, b) and is left alone.
    """
    root = None if verdict.leading_root is None else verdict.leading_root * scale
    omega = None if verdict.omega_s is None else verdict.omega_s * scale
    return VerdictOut(
        status=verdict.status.value,
        witness=Witness(omega_s=omega, leading_root=complex_pair(root), note=verdict.note or None),
        bound_used=verdict.bound_used,
    )


def report_out(report: RootReport, scale: float) -> RootReportOut:
    root = None if report.leading_root is None else report.leading_root * scale
    return RootReportOut(
        unstable_count=report.unstable_count,
        leading_root=complex_pair(root),
        contour_bound=report.contour_bound * scale,
        marginal=report.marginal,
    )


def run_check(args: argparse.Namespace, settings: Settings) -> int:
    a, b = args.a, args.b
    dist = load_distribution(args)
    if dist is None and args.E is None:
        raise UsageError("check needs --E, --dist, or both")
    if dist is not None and args.E is not None:
        dist = scale_to_mean(dist, args.E)
    E = args.E if args.E is not None else dist.mean()

    region = classify_region(a, b, E)
    response = CheckResponse(a=a, b=b, E=E, region=verdict_out(region), verdict=verdict_out(region))
    verdict, scale = region, 1.0

    if dist is not None and b > 0:
        a_n, dist_n = normalize(a, b, dist)
        scale = b
        if abs(a_n) < 1:
            sufficient = sufficient_test(a_n, dist_n, settings=settings)
            if sufficient is not None:
                response.sufficient = verdict_out(sufficient)
        if -1 < a_n <= MAX_ABS_A:
            report = count_unstable_roots(a_n, dist_n, settings=settings)
            response.roots = report_out(report, scale)
            counted = root_verdict(report)
            if region.status in (StabilityStatus.STABLE, StabilityStatus.UNSTABLE) and counted.status != region.status:
                log.warning("root count says %s where the region test says %s",
                            counted.status.value, region.status.value)
            else:
                verdict = StabilityVerdict(
                    counted.status, counted.leading_root, counted.omega_s, region.bound_used, counted.note,
                )
        if isinstance(dist, DiracMass):
            verdict = hayes_verdict(a, b, E)
            scale = 1.0

    response.verdict = verdict_out(verdict, scale)
    payload = response.model_dump_json()
    print(payload)

    if settings.archive_path:
        with open_archive(settings.archive_path) as con:
            record_verdict(con, verdict.status.value, payload, spec_text(dist), {"a": a, "b": b, "E": E})
    return verdict.status.exit_code


def _discrete(args: argparse.Namespace):
    dist = require_distribution(args)
    if not isinstance(dist, (DiscreteMixture, DiracMass)):
        raise UsageError(f"extremal needs a discrete or dirac distribution, got {dist.kind}")
    if args.E is not None:
        dist = scale_to_mean(dist, args.E)
    return dist


def run_extremal(args: argparse.Namespace, settings: Settings) -> int:
    dist = _discrete(args)
    omega_s: Optional[float] = args.omega_s

    if omega_s is None:
        if args.a is None:
            raise UsageError("extremal needs --a or --omega-s")
        crossings = hopf_crossings(args.a, dist, settings=settings)
        if not crossings:
            print_json(NoCrossingOut(message=f"no Hopf crossing for a={args.a:g}; stable for every such mean"))
            return 0
        omega_s = crossings[0]
        log.info("reducing at the smallest Hopf crossing omega_s=%.9g", omega_s)

    pair = reduce_to_extremal(dist, omega_s, args.a, settings=settings)
    print_json(
        ExtremalOut(
            tau2_star=pair.tau2,
            p1_star=pair.p1,
            p2_star=pair.p2,
            s_star=pair.s_star,
            omega_s=pair.omega_s,
            mean=pair.preserved_mean,
            c_preserved=pair.preserved_c,
            flagged=pair.flagged,
            steps=len(pair.steps),
        )
    )
    return 0
