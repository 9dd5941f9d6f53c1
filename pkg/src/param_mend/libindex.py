"""Static index of API definitions in a library source tree.

Every function, method and class definition in the tree becomes an index
entry, keyed by the *user-facing* call path: the actual dotted source path
adjusted through the re-export chains declared in ``__init__`` files.  Stub
files contribute overload signatures for extension-backed APIs.  Same-name
entries are kept as distinct candidates; disambiguation happens downstream.
"""

from __future__ import annotations

import ast
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .sigmodel import (
    ApiSignature,
    SigOrigin,
    signature_from_arguments,
    signature_from_json,
    signature_to_json,
)


@dataclass(frozen=True)
class ImportMap:
    """Re-export pairs harvested from one ``__init__`` file, in file order.

    A ``from .mod import name as alias`` statement yields ``("mod.name",
    "alias")``; a star import yields ``("mod.*", "")``.
    """

    init_file_path: str
    pairs: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class IndexEntry:
    simplified_name: str
    actual_name: str
    actual_source_path: str
    signature: ApiSignature
    is_overload_stub: bool = False


@dataclass
class ApiIndex:
    version_tag: str
    entries: dict[str, list[IndexEntry]] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def add(self, entry: IndexEntry) -> None:
        self.entries.setdefault(entry.simplified_name, []).append(entry)

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def all_entries(self) -> list[IndexEntry]:
        return [e for group in self.entries.values() for e in group]


def harvest_import_map(init_file: Path) -> ImportMap:
    """Collect from-import pairs of one ``__init__`` file, in statement order."""
    pairs: list[tuple[str, str]] = []
    try:
        tree = ast.parse(init_file.read_text(encoding="utf-8"))
    except (SyntaxError, OSError):
        return ImportMap(init_file_path=str(init_file), pairs=())
    for node in ast.walk(tree):
        if not isinstance(node, ast.ImportFrom):
            continue
        module = node.module or ""
        for alias in node.names:
            if alias.name == "*":
                key = f"{module}.*" if module else "*"
                pairs.append((key, ""))
            else:
                key = f"{module}.{alias.name}" if module else alias.name
                pairs.append((key, alias.asname or alias.name))
    return ImportMap(init_file_path=str(init_file), pairs=tuple(pairs))


def simplify_qualified_name(
    fqn: str,
    actual_path: Union[str, Path],
    import_maps: dict[str, ImportMap],
) -> str:
    """Adjust an actual dotted source path to the user-facing call path.

    Walks parent directories of ``actual_path``; at each level that has an
    ``__init__`` file, the first pair whose key occurs in the current name is
    applied (star keys strip their prefix, named keys substitute the alias),
    then the walk continues upward.  ``import_maps`` is keyed by the
    directory containing the ``__init__`` file.
    """
    curr_name = fqn
    curr_path = Path(actual_path)
    while True:
        parent = curr_path.parent
        if parent == curr_path:
            break
        import_map = import_maps.get(str(parent))
        if import_map is not None:
            rep_key = rep_value = ""
            for key, value in import_map.pairs:
                if key.endswith("*"):
                    stripped = key.rstrip("*")
                    if stripped in curr_name:
                        rep_key, rep_value = stripped, ""
                        break
                elif key in curr_name:
                    rep_key, rep_value = key, value
                    break
            if rep_key:
                curr_name = curr_name.replace(rep_key, rep_value)
        curr_path = parent
    return curr_name


def _module_dotted_path(py_file: Path, root: Path) -> str:
    rel = py_file.relative_to(root)
    parts = list(rel.parts)
    if parts[-1] in ("__init__.py", "__init__.pyi"):
        parts = parts[:-1]
    else:
        parts[-1] = parts[-1].rsplit(".", 1)[0]
    return ".".join(parts)


def _index_definitions(
    tree: ast.AST,
    source: str,
    module_path: str,
    version_tag: str,
    origin: SigOrigin,
) -> list[tuple[str, ApiSignature, bool]]:
    """(actual dotted name, signature, is_method) for every def in the module.

    Depth-first so nested definitions carry their full containment path.
    Class definitions additionally appear under the class path itself with
    their initializer signature.
    """
    found: list[tuple[str, ApiSignature, bool]] = []

    def visit(node: ast.AST, prefix: str, in_class: bool) -> None:
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                name = f"{prefix}.{child.name}" if prefix else child.name
                sig = signature_from_arguments(
                    child.args,
                    source,
                    qualified_name=name,
                    version_tag=version_tag,
                    origin=origin,
                    method_context=in_class,
                )
                found.append((name, sig, in_class))
                visit(child, name, False)
            elif isinstance(child, ast.ClassDef):
                name = f"{prefix}.{child.name}" if prefix else child.name
                init = next(
                    (
                        stmt
                        for stmt in child.body
                        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef))
                        and stmt.name == "__init__"
                    ),
                    None,
                )
                if init is not None:
                    ctor = signature_from_arguments(
                        init.args,
                        source,
                        qualified_name=name,
                        version_tag=version_tag,
                        origin=origin,
                        method_context=True,
                    )
                else:
                    ctor = ApiSignature(
                        qualified_name=name,
                        parameters=(),
                        origin=origin,
                        version_tag=version_tag,
                    )
                found.append((name, ctor, False))
                visit(child, name, True)
            else:
                visit(child, prefix, in_class)

    visit(tree, module_path, False)
    return found


def index_library(
    source_root: Union[str, Path], version_tag: str, package: Optional[str] = None
) -> ApiIndex:
    """Index every definition in a library source tree.

    Dotted names are rooted at ``source_root``; pass ``package`` to scan a
    single package directory under a larger root (a site-packages dir, say)
    while keeping names rooted the same way.  Files that fail to parse are
    recorded in the index diagnostics and skipped; the rest still indexes.
    """
    root = Path(source_root)
    base = root / package if package else root
    index = ApiIndex(version_tag=version_tag)

    init_dirs: dict[str, ImportMap] = {}
    for init_file in sorted(base.rglob("__init__.py")):
        init_dirs[str(init_file.parent)] = harvest_import_map(init_file)

    for py_file in sorted(base.rglob("*.py")):
        try:
            source = py_file.read_text(encoding="utf-8")
            tree = ast.parse(source)
        except (SyntaxError, UnicodeDecodeError) as exc:
            index.diagnostics.append(f"parse failure: {py_file}: {exc}")
            continue
        module_path = _module_dotted_path(py_file, root)
        for actual_name, sig, _ in _index_definitions(
            tree, source, module_path, version_tag, SigOrigin.STATIC_SOURCE
        ):
            simplified = simplify_qualified_name(actual_name, py_file, init_dirs)
            index.add(
                IndexEntry(
                    simplified_name=simplified,
                    actual_name=actual_name,
                    actual_source_path=str(py_file),
                    signature=sig,
                )
            )

    for pyi_file in sorted(base.rglob("*.pyi")):
        module_path = _module_dotted_path(pyi_file, root)
        try:
            for sig in parse_stub_overloads(pyi_file, version_tag=version_tag):
                actual_name = f"{module_path}.{sig.qualified_name}"
                simplified = simplify_qualified_name(actual_name, pyi_file, init_dirs)
                index.add(
                    IndexEntry(
                        simplified_name=simplified,
                        actual_name=actual_name,
                        actual_source_path=str(pyi_file),
                        signature=sig,
                        is_overload_stub=True,
                    )
                )
        except SyntaxError as exc:
            index.diagnostics.append(f"stub skipped: {pyi_file}: {exc}")

    return index


def parse_stub_overloads(
    stub_file: Union[str, Path], version_tag: str = ""
) -> list[ApiSignature]:
    """One signature per ``def`` in a stub file, overloads kept separate.

    Overloaded declarations share a qualified name and appear in source
    order.  Raises ``SyntaxError`` for an unparseable stub.
    """
    path = Path(stub_file)
    source = path.read_text(encoding="utf-8")
    tree = ast.parse(source)
    out: list[ApiSignature] = []

    def visit(node: ast.AST, prefix: str, in_class: bool) -> None:
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                name = f"{prefix}.{child.name}" if prefix else child.name
                out.append(
                    signature_from_arguments(
                        child.args,
                        source,
                        qualified_name=name,
                        version_tag=version_tag,
                        origin=SigOrigin.PYI_STUB,
                        method_context=in_class,
                    )
                )
            elif isinstance(child, ast.ClassDef):
                name = f"{prefix}.{child.name}" if prefix else child.name
                visit(child, name, True)
            else:
                visit(child, prefix, in_class)

    visit(tree, "", False)
    return out


def lookup_candidates(index: ApiIndex, call_path: str) -> list[ApiSignature]:
    """Signature candidates for a restored call path.

    Exact simplified-name matches come first; entries that merely share the
    terminal segment follow as a same-name fallback.
    """
    exact = index.entries.get(call_path, [])
    terminal = call_path.rsplit(".", 1)[-1]
    suffix: list[IndexEntry] = []
    for name, group in sorted(index.entries.items()):
        if name == call_path:
            continue
        if name.rsplit(".", 1)[-1] == terminal:
            suffix.extend(group)
    return [e.signature for e in list(exact) + suffix]


# --- optional on-disk cache -------------------------------------------------

def source_tree_digest(source_root: Union[str, Path]) -> str:
    root = Path(source_root)
    digest = hashlib.sha256()
    for py_file in sorted(root.rglob("*.py")) + sorted(root.rglob("*.pyi")):
        digest.update(str(py_file.relative_to(root)).encode())
        digest.update(py_file.read_bytes())
    return digest.hexdigest()


def save_index_cache(index: ApiIndex, source_root: Union[str, Path], cache_file: Union[str, Path]) -> None:
    doc = {
        "version_tag": index.version_tag,
        "tree_digest": source_tree_digest(source_root),
        "diagnostics": index.diagnostics,
        "entries": [
            {
                "simplified_name": e.simplified_name,
                "actual_name": e.actual_name,
                "actual_source_path": e.actual_source_path,
                "is_overload_stub": e.is_overload_stub,
                "signature": signature_to_json(e.signature),
            }
            for e in index.all_entries()
        ],
    }
    Path(cache_file).write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="utf-8")


def load_index_cache(
    cache_file: Union[str, Path], source_root: Optional[Union[str, Path]] = None
) -> Optional[ApiIndex]:
    """Load a cached index; ``None`` when missing or stale for the given tree."""
    path = Path(cache_file)
    if not path.exists():
        return None
    doc = json.loads(path.read_text(encoding="utf-8"))
    if source_root is not None and doc.get("tree_digest") != source_tree_digest(source_root):
        return None
    index = ApiIndex(version_tag=doc["version_tag"], diagnostics=list(doc.get("diagnostics", [])))
    for item in doc["entries"]:
        index.add(
            IndexEntry(
                simplified_name=item["simplified_name"],
                actual_name=item["actual_name"],
                actual_source_path=item["actual_source_path"],
                signature=signature_from_json(item["signature"]),
                is_overload_stub=item["is_overload_stub"],
            )
        )
    return index
