"""Prints a one-line verdict per acceptance criterion after the run."""

CRITERIA = [
    ("test_c1_parameter_count_ratios",
     "C1 parameter-count ratios across capacity/growth settings"),
    ("test_c2_trainable_parameter_totals",
     "C2 trainable totals: closed form == graph walk == weight scalars, in bands"),
    ("test_c3_quantization_preserves_masks",
     "C3 int8 vs float: dice mean>=0.98 min>=0.95, prob MAD<=0.02, <10 min"),
    ("test_c4_primitives_match_oracles",
     "C4 conv/pool/upconv vs brute-force oracles; int8 conv exact vs wide-int"),
    ("test_c5_generator_ground_truth",
     "C5 synthetic truth: ratio within 0.03, ISNT >=95%, dice properties"),
    ("test_c6_timing_protocol",
     "C6 timing: warm-up untimed, per-image = pass/N, mean/std over reps"),
    ("test_c7_deployment_boundary",
     "C7 planner: frozen break-even, no-break-even case, boundary sweep"),
    ("test_c8_cli_round_trip",
     "C8 CLI pipeline end to end, byte-exact round-trips, <60 s"),
]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    stats = terminalreporter.stats
    outcome = {}
    for category, label in (("passed", "PASS"), ("failed", "FAIL"),
                            ("error", "FAIL")):
        for rep in stats.get(category, []):
            if getattr(rep, "when", "call") != "call" and category == "passed":
                continue
            outcome[rep.location[2].split("[")[0]] = label
    lines = [(outcome.get(name), desc) for name, desc in CRITERIA]
    if not any(status for status, _ in lines):
        return
    terminalreporter.section("acceptance criteria")
    for status, desc in lines:
        terminalreporter.write_line(f"{status or 'NOT RUN':7s} {desc}")
