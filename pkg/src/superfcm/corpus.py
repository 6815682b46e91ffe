"""Bundled example programs and how to load them."""

from importlib import resources

from .syntax import Program, parse_program

NAMES = (
    "fib",
    "fibtest",
    "fibA",
    "openB",
    "openA",
    "ex5",
    "g",
    "f",
)


def program_text(name: str) -> str:
    stem = name[:-2] if name.endswith(".l") else name
    if stem not in NAMES:
        raise KeyError("no bundled program named %r" % name)
    return (
        resources.files("superfcm").joinpath("programs/%s.l" % stem).read_text()
    )


def load(name: str) -> Program:
    return parse_program(program_text(name))
