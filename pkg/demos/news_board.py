# %% [markdown]
# # Checking the news board service
#
# `news_board.rj` declares a `user` whose `uid` is a GUID-shaped string and
# whose `age` must exceed 18. Two procedures look a user up by name and then
# ask for that user's posts. The first passes `user.uid`; the second passes
# `user.name`, which is only a plain string.
#
# Needs `z3` on PATH (or `REFCHECK_SOLVER`).

# %%
import sys
import tempfile
from pathlib import Path

from refcheck import SolverConfig, check_program, parse_program, resolve
from refcheck.cli import CheckConfig, cmd_emit_smt

HERE = Path(__file__).parent
source = (HERE / "news_board.rj").read_text()
program = resolve(parse_program(source))
print(f"{len(program.program.types)} types, {len(program.program.operations)} operations")

# %% [markdown]
# ## Static check
#
# Every call site becomes one verification condition. A short timeout keeps
# the demo quick: the wrong-field call is never disproved, it runs out of time.

# %%
cfg = SolverConfig(timeout_ms=int(sys.argv[1]) if len(sys.argv) > 1 else 3000)
if not cfg.available():
    sys.exit("z3 not found; install it with `pip install z3-solver` or set REFCHECK_SOLVER")
report = check_program(program, cfg, jobs=4)
print(report.to_text())

# %% [markdown]
# The last call site is reported NotVerified, and it also shows up among the
# residual checks: a runtime has to validate that argument instead.

# %%
for r in report.residual_checks:
    print(r)
print("exit code:", report.exit_code)

# %% [markdown]
# ## The generated SMT-LIB
#
# `emit-smt` writes a shared prelude and one script per call site.

# %%
with tempfile.TemporaryDirectory() as out:
    written = cmd_emit_smt(HERE / "news_board.rj", Path(out), CheckConfig())
    for p in written:
        print(p.name)
    vc = Path(out, "all_posts_by_user.1.smt2").read_text().splitlines()
    print("\n".join(vc[-8:]))
