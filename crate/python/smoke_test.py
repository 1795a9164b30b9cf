"""Smoke test for the ccf Python module.

Builds the extension if needed and exercises each binding once:

    python3 python/smoke_test.py
"""

import importlib.util
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent

HIL_71 = [
    737707086760731113357714241006081263,
    -425319473946139603274605151187659,
    5138800366453976780323726329446,
    -823534263439730779968091389,
    98394038810047812049302,
    -3091990138604570,
    313645809715,
    1,
]


def load():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "ccf-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libccf_python.so"
    tmp = pathlib.Path(tempfile.mkdtemp())
    shutil.copy(lib, tmp / "ccf.so")
    spec = importlib.util.spec_from_file_location("ccf", tmp / "ccf.so")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    ccf = load()
    assert ccf.class_number(-71) == 7
    assert ccf.reduced_forms(-3) == [(1, 1, 1)]
    assert ccf.hilbert_class_poly(-71) == HIL_71
    assert ccf.invariant_poly("f2", -71) == ("zeta48*f2", [-1, 2, 1, -1, -1, -1, 1, 1])
    name, coeffs = ccf.invariant_poly("gamma2", -23)
    assert name == "zeta3*gamma2" and coeffs[-1] == 1
    try:
        ccf.class_number(-5)
    except ValueError:
        pass
    else:
        raise AssertionError("-5 is not a discriminant")
    code, out, _ = ccf.run(["forms", "--disc", "-23", "--json"])
    assert code == 0
    assert json.loads(out)["outputs"]["class_number"] == 3
    code, _, _ = ccf.run(["hilbert", "--disc", "-71", "--max-bits", "128"])
    assert code == 3
    print("ccf", ccf.__version__, "smoke test ok")


if __name__ == "__main__":
    sys.exit(main())
