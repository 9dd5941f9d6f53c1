import random
import textwrap

from param_mend.libindex import (
    ImportMap,
    harvest_import_map,
    index_library,
    load_index_cache,
    lookup_candidates,
    parse_stub_overloads,
    save_index_cache,
    simplify_qualified_name,
)

from oracles import simplify_oracle


def write(root, relpath, content=""):
    path = root / relpath
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(textwrap.dedent(content), encoding="utf-8")
    return path


def make_numpy_like_tree(tmp_path):
    write(
        tmp_path,
        "numpy/core/fromnumeric.py",
        """
        def amax(a, axis=None, out=None):
            pass
        """,
    )
    write(tmp_path, "numpy/core/__init__.py", "from .fromnumeric import amax as max\n")
    write(tmp_path, "numpy/__init__.py", "from .core import *\n")
    # two more same-name APIs, mirroring real aliasing trouble
    write(
        tmp_path,
        "numpy/ma/core.py",
        """
        class MaskedArray:
            def max(self, axis=None):
                pass
        """,
    )
    write(
        tmp_path,
        "numpy/core/getlimits.py",
        """
        class iinfo:
            def max(self):
                pass
        """,
    )
    return tmp_path


def test_index_actual_path_and_simplification(tmp_path):
    index = index_library(make_numpy_like_tree(tmp_path), "1.10.0")
    by_actual = {e.actual_name: e for e in index.all_entries()}
    entry = by_actual["numpy.core.fromnumeric.amax"]
    assert entry.simplified_name == "numpy.max"
    assert entry.signature.positional[0].name == "a"
    assert index.version_tag == "1.10.0"


def test_lookup_exact_first_then_same_name(tmp_path):
    index = index_library(make_numpy_like_tree(tmp_path), "1.10.0")
    candidates = lookup_candidates(index, "numpy.max")
    assert len(candidates) == 3
    # the amax-backed entry comes first; the same-name methods trail
    assert candidates[0].positional and candidates[0].positional[0].name == "a"


def test_lookup_empty_index():
    from param_mend.libindex import ApiIndex

    assert lookup_candidates(ApiIndex(version_tag="x"), "numpy.max") == []


def test_empty_directory_empty_index(tmp_path):
    index = index_library(tmp_path, "0")
    assert len(index) == 0


def test_nested_definitions_full_containment(tmp_path):
    write(
        tmp_path,
        "lib/mod.py",
        """
        def outer(a):
            def inner(b):
                pass
            return inner

        class Box:
            def __init__(self, size):
                pass
            class Lid:
                def open(self, wide=False):
                    pass
        """,
    )
    index = index_library(tmp_path, "1")
    names = {e.actual_name for e in index.all_entries()}
    assert "lib.mod.outer" in names
    assert "lib.mod.outer.inner" in names
    assert "lib.mod.Box" in names
    assert "lib.mod.Box.__init__" in names
    assert "lib.mod.Box.Lid" in names
    assert "lib.mod.Box.Lid.open" in names
    # class entry exposes the initializer signature with self stripped
    box = next(e for e in index.all_entries() if e.actual_name == "lib.mod.Box")
    assert [p.name for p in box.signature.positional] == ["size"]
    lid_open = next(e for e in index.all_entries() if e.actual_name == "lib.mod.Box.Lid.open")
    assert [p.name for p in lid_open.signature.positional] == ["wide"]


def test_parse_failure_recorded_not_fatal(tmp_path):
    write(tmp_path, "lib/good.py", "def ok(a):\n    pass\n")
    write(tmp_path, "lib/bad.py", "def broken(:\n")
    index = index_library(tmp_path, "1")
    assert any("bad.py" in d for d in index.diagnostics)
    assert any(e.actual_name == "lib.good.ok" for e in index.all_entries())


def test_determinism(tmp_path):
    make_numpy_like_tree(tmp_path)
    one = index_library(tmp_path, "v")
    two = index_library(tmp_path, "v")
    assert [e.actual_name for e in one.all_entries()] == [
        e.actual_name for e in two.all_entries()
    ]
    assert list(one.entries) == list(two.entries)


def test_stub_overloads(tmp_path):
    stub = write(
        tmp_path,
        "torch/__init__.pyi",
        """
        from typing import overload

        class _TensorBase(object):
            @overload
            def max(self, dim: int, keepdim: bool = False) -> tuple: ...
            @overload
            def max(self, dim: str, keepdim: bool = False) -> tuple: ...
            @overload
            def max(self, other) -> object: ...
            @overload
            def max(self) -> object: ...
        """,
    )
    sigs = parse_stub_overloads(stub)
    maxes = [s for s in sigs if s.qualified_name == "_TensorBase.max"]
    assert len(maxes) == 4
    assert all(s.self_stripped for s in maxes)
    assert {len(s.parameters) for s in maxes} == {0, 1, 2}


def test_stub_without_overloads_one_per_def(tmp_path):
    stub = write(tmp_path, "m.pyi", "def f(a): ...\ndef g(b=1): ...\n")
    sigs = parse_stub_overloads(stub)
    assert [s.qualified_name for s in sigs] == ["f", "g"]


def test_stub_overload_count_matches_line_scan(tmp_path):
    # grep-style oracle: count decorated defs in the raw text
    content = """
    from typing import overload

    @overload
    def pick(a: int) -> int: ...
    @overload
    def pick(a: str) -> str: ...
    def other(x): ...
    """
    stub = write(tmp_path, "s.pyi", content)
    raw = stub.read_text()
    oracle_count = raw.count("@overload")
    sigs = parse_stub_overloads(stub)
    picks = [s for s in sigs if s.qualified_name == "pick"]
    assert len(picks) == oracle_count


def test_simplify_numpy_chain(tmp_path):
    tree = make_numpy_like_tree(tmp_path)
    maps = {
        str(tree / "numpy/core"): harvest_import_map(tree / "numpy/core/__init__.py"),
        str(tree / "numpy"): harvest_import_map(tree / "numpy/__init__.py"),
    }
    result = simplify_qualified_name(
        "numpy.core.fromnumeric.amax", tree / "numpy/core/fromnumeric.py", maps
    )
    assert result == "numpy.max"


def test_simplify_no_init_files_is_identity(tmp_path):
    assert (
        simplify_qualified_name("a.b.c", tmp_path / "a/b.py", {}) == "a.b.c"
    )


def test_simplify_idempotent_on_fixpoint(tmp_path):
    tree = make_numpy_like_tree(tmp_path)
    maps = {
        str(tree / "numpy/core"): harvest_import_map(tree / "numpy/core/__init__.py"),
        str(tree / "numpy"): harvest_import_map(tree / "numpy/__init__.py"),
    }
    once = simplify_qualified_name(
        "numpy.core.fromnumeric.amax", tree / "numpy/core/fromnumeric.py", maps
    )
    again = simplify_qualified_name(once, tree / "numpy/core/fromnumeric.py", maps)
    assert once == again


def test_star_import_map_convention(tmp_path):
    init = write(tmp_path, "pkg/__init__.py", "from .core import *\nfrom .io import load\n")
    imap = harvest_import_map(init)
    assert imap.pairs == (("core.*", ""), ("io.load", "load"))


_NAMES = ["alpha", "beta", "gamma", "amax", "max", "core", "lin"]


def random_level_maps(rng, segments):
    """Import-map pairs for each directory level, innermost first."""
    levels = []
    for depth in range(len(segments) - 1, 0, -1):
        child = segments[depth]
        pairs = []
        for _ in range(rng.randint(0, 2)):
            if rng.random() < 0.4:
                pairs.append((f"{child}.*", ""))
            else:
                tail = rng.choice(_NAMES)
                alias = rng.choice(_NAMES)
                pairs.append((f"{child}.{tail}", alias))
        levels.append(pairs)
    return levels


def test_simplify_matches_exhaustive_oracle(tmp_path):
    rng = random.Random(99)
    for case in range(1200):
        depth = rng.randint(2, 4)
        segments = [f"d{i}" for i in range(depth)] + [rng.choice(_NAMES)]
        fqn = ".".join(segments)
        levels = random_level_maps(rng, segments)

        # lay the maps out as the directory-keyed dict the implementation takes
        base = tmp_path / f"case{case}"
        dirs = [base / "/".join(segments[: i + 1]) for i in range(depth)]
        actual_path = dirs[-1] / "mod.py"
        import_maps = {}
        for level_pairs, directory in zip(levels, reversed(dirs)):
            if level_pairs:
                import_maps[str(directory)] = ImportMap(
                    init_file_path=str(directory / "__init__.py"),
                    pairs=tuple(level_pairs),
                )

        expected, reachable = simplify_oracle(fqn, levels)
        got = simplify_qualified_name(fqn, actual_path, import_maps)
        assert got == expected, (fqn, levels)
        assert got in reachable


def test_index_cache_roundtrip(tmp_path):
    tree = make_numpy_like_tree(tmp_path)
    index = index_library(tree, "1.10.0")
    cache = tmp_path / "cache.json"
    save_index_cache(index, tree, cache)
    loaded = load_index_cache(cache, tree)
    assert loaded is not None
    assert {e.actual_name for e in loaded.all_entries()} == {
        e.actual_name for e in index.all_entries()
    }
    # cache is keyed by tree content: touching a file invalidates it
    write(tree, "numpy/extra.py", "def fresh(q):\n    pass\n")
    assert load_index_cache(cache, tree) is None
