"""Call-site extraction and argument-passing analysis for client projects.

A first pass over a source file collects binding facts: imports, from-imports,
simple assignments, and class definitions with their bases.  A second,
depth-first pass finds every call whose restored qualified path starts with
the target library name, visiting inner calls before the calls that consume
them so that ``f(x, foo(y))`` yields ``foo`` first.

Call text is normalized to a single line (tabs expanded, multi-line argument
lists joined) so it can serve as a stable report key; source positions keep
pointing at the original file.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from .sigmodel import ApiSignature, ParamKind


class Passing(str, Enum):
    POSITIONAL = "p"
    KEYWORD = "k"
    NOT_PASSED = "n"


class InvocationForm(str, Enum):
    DIRECT = "direct"
    CLASS_OBJECT = "class_object"
    RETURN_VALUE = "return_value"
    ARGUMENT = "argument"
    INHERITANCE = "inheritance"
    DECORATOR = "decorator"
    ASYNC_AWAIT = "async_await"
    CONTEXT_MANAGER = "context_manager"


class ParseFailure(Exception):
    def __init__(self, file: str, reason: str):
        super().__init__(f"{file}: {reason}")
        self.file = file
        self.reason = reason


class Unresolved(Exception):
    """No binding chain from this call reaches an import."""


class BindingError(Exception):
    """The call's arguments cannot be bound against the given signature."""


@dataclass(frozen=True)
class ArgUse:
    expr_text: str
    passing: Passing
    keyword_name: Optional[str] = None
    position: Optional[int] = None


@dataclass
class CallSite:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int
    call_text: str
    restored_path: str
    args: list[ArgUse]
    invocation_form: InvocationForm
    receiver_chain: Optional[str] = None

    @property
    def location(self) -> str:
        return f"{self.file}:{self.line}"


@dataclass
class FileBindings:
    """Name-binding facts harvested from one source file."""

    imports: dict[str, str] = field(default_factory=dict)
    assignments: dict[str, str] = field(default_factory=dict)
    class_bases: dict[str, list[str]] = field(default_factory=dict)
    class_methods: dict[str, set[str]] = field(default_factory=dict)


def _single_line(segment: str) -> str:
    segment = segment.expandtabs(4)
    if "\n" not in segment:
        return segment
    out = ""
    for raw in segment.splitlines():
        piece = raw.strip()
        if not piece:
            continue
        if not out:
            out = piece
            continue
        last, first = out[-1], piece[0]
        if last == "," and first not in ")]}":
            out += " " + piece
        elif (last.isalnum() or last in "_'\"") and (first.isalnum() or first in "_'\""):
            out += " " + piece
        else:
            out += piece
    return out


def collect_bindings(tree: ast.AST) -> FileBindings:
    """Harvest import/assignment/class facts from every statement in the file."""
    bindings = FileBindings()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                if alias.asname:
                    bindings.imports[alias.asname] = alias.name
                else:
                    # `import a.b.c` binds only the top-level name; dotted
                    # usage spells the rest of the path itself.
                    top = alias.name.split(".")[0]
                    bindings.imports[top] = top
        elif isinstance(node, ast.ImportFrom):
            module = node.module or ""
            for alias in node.names:
                if alias.name == "*":
                    continue
                bound = alias.asname or alias.name
                full = f"{module}.{alias.name}" if module else alias.name
                bindings.imports[bound] = full
        elif isinstance(node, ast.Assign):
            for target in node.targets:
                if isinstance(target, ast.Name):
                    bindings.assignments[target.id] = _expr_key(node.value)
        elif isinstance(node, (ast.With, ast.AsyncWith)):
            for item in node.items:
                if isinstance(item.optional_vars, ast.Name):
                    bindings.assignments[item.optional_vars.id] = _expr_key(
                        item.context_expr
                    )
        elif isinstance(node, ast.ClassDef):
            bindings.class_bases[node.name] = [ast.unparse(b) for b in node.bases]
            bindings.class_methods[node.name] = {
                stmt.name
                for stmt in node.body
                if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef))
            }
    return bindings


def _expr_key(node: ast.expr) -> str:
    """Reduce an assigned expression to the dotted head it constructs from."""
    if isinstance(node, ast.Await):
        node = node.value
    if isinstance(node, ast.Call):
        return _expr_key(node.func)
    if isinstance(node, ast.Attribute):
        return f"{_expr_key(node.value)}.{node.attr}"
    if isinstance(node, ast.Name):
        return node.id
    return ""


def resolve_dotted(dotted: str, bindings: FileBindings, _depth: int = 0) -> Optional[str]:
    """Expand the head of a dotted name through imports and assignments."""
    if not dotted or _depth > 8:
        return None
    head, _, rest = dotted.partition(".")
    resolved: Optional[str] = None
    if head in bindings.imports:
        resolved = bindings.imports[head]
    elif head in bindings.assignments:
        resolved = resolve_dotted(bindings.assignments[head], bindings, _depth + 1)
    elif head in bindings.class_bases:
        return None  # user-defined class, not a library path
    if resolved is None:
        return None
    return f"{resolved}.{rest}" if rest else resolved


class _CallExtractor:
    def __init__(self, source: str, file: str, library_name: str, bindings: FileBindings):
        self.source = source
        self.file = file
        self.library = library_name
        self.bindings = bindings
        self.sites: list[CallSite] = []
        self.diagnostics: list[str] = []
        self.class_stack: list[str] = []
        # flags keyed by id(node) for context the parent establishes
        self.decorator_calls: set[int] = set()
        self.awaited_calls: set[int] = set()
        self.context_calls: set[int] = set()
        self.argument_calls: set[int] = set()

    def run(self, tree: ast.AST) -> list[CallSite]:
        self._visit(tree)
        return self.sites

    # Depth-first, children before the node itself, so inner calls are
    # emitted before the calls that consume them.
    def _visit(self, node: ast.AST) -> None:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            for dec in node.decorator_list:
                if isinstance(dec, ast.Call):
                    self.decorator_calls.add(id(dec))
        if isinstance(node, ast.Await) and isinstance(node.value, ast.Call):
            self.awaited_calls.add(id(node.value))
        if isinstance(node, (ast.With, ast.AsyncWith)):
            for item in node.items:
                if isinstance(item.context_expr, ast.Call):
                    self.context_calls.add(id(item.context_expr))
        if isinstance(node, ast.Call):
            for arg in list(node.args) + [kw.value for kw in node.keywords]:
                inner = arg.value if isinstance(arg, ast.Starred) else arg
                if isinstance(inner, ast.Call):
                    self.argument_calls.add(id(inner))

        if isinstance(node, ast.ClassDef):
            self.class_stack.append(node.name)
            for child in ast.iter_child_nodes(node):
                self._visit(child)
            self.class_stack.pop()
            return

        for child in ast.iter_child_nodes(node):
            self._visit(child)

        if isinstance(node, ast.Call):
            self._emit(node)

    def _emit(self, node: ast.Call) -> None:
        path = self._restore(node)
        if path is None or not (
            path == self.library or path.startswith(self.library + ".")
        ):
            return
        args: list[ArgUse] = []
        position = 0
        for a in node.args:
            text = _single_line(ast.get_source_segment(self.source, a) or ast.unparse(a))
            if isinstance(a, ast.Starred):
                text = "*" + _single_line(
                    ast.get_source_segment(self.source, a.value) or ast.unparse(a.value)
                )
            args.append(ArgUse(expr_text=text, passing=Passing.POSITIONAL, position=position))
            position += 1
        for kw in node.keywords:
            text = _single_line(
                ast.get_source_segment(self.source, kw.value) or ast.unparse(kw.value)
            )
            args.append(
                ArgUse(
                    expr_text=text,
                    passing=Passing.KEYWORD,
                    keyword_name=kw.arg,  # None for **expansion
                )
            )
        receiver = None
        if isinstance(node.func, ast.Attribute) and isinstance(node.func.value, ast.Call):
            receiver = _single_line(
                ast.get_source_segment(self.source, node.func.value)
                or ast.unparse(node.func.value)
            )
        segment = ast.get_source_segment(self.source, node) or ast.unparse(node)
        self.sites.append(
            CallSite(
                file=self.file,
                line=node.lineno,
                col=node.col_offset,
                end_line=node.end_lineno or node.lineno,
                end_col=node.end_col_offset or node.col_offset,
                call_text=_single_line(segment),
                restored_path=path,
                args=args,
                invocation_form=self._form(node),
                receiver_chain=receiver,
            )
        )

    def _restore(self, node: ast.Call) -> Optional[str]:
        func = node.func
        if isinstance(func, ast.Name):
            return resolve_dotted(func.id, self.bindings)
        if isinstance(func, ast.Attribute):
            base = func.value
            if isinstance(base, ast.Name) and base.id in ("self", "cls") and self.class_stack:
                return self._resolve_inherited(func.attr)
            chain = _expr_key(func)
            if chain:
                return resolve_dotted(chain, self.bindings)
        return None

    def _resolve_inherited(self, method: str) -> Optional[str]:
        cls = self.class_stack[-1]
        if method in self.bindings.class_methods.get(cls, set()):
            return None  # the class's own method, not an inherited API
        for base in self.bindings.class_bases.get(cls, []):
            resolved = resolve_dotted(base, self.bindings)
            if resolved is not None:
                return f"{resolved}.{method}"
        return None

    def _form(self, node: ast.Call) -> InvocationForm:
        if id(node) in self.decorator_calls:
            return InvocationForm.DECORATOR
        if id(node) in self.awaited_calls:
            return InvocationForm.ASYNC_AWAIT
        if id(node) in self.context_calls:
            return InvocationForm.CONTEXT_MANAGER
        func = node.func
        if isinstance(func, ast.Attribute):
            if (
                isinstance(func.value, ast.Name)
                and func.value.id in ("self", "cls")
                and self.class_stack
            ):
                return InvocationForm.INHERITANCE
            if isinstance(func.value, ast.Call):
                return InvocationForm.RETURN_VALUE
            if (
                isinstance(func.value, ast.Name)
                and func.value.id in self.bindings.assignments
            ):
                return InvocationForm.CLASS_OBJECT
        if id(node) in self.argument_calls:
            return InvocationForm.ARGUMENT
        return InvocationForm.DIRECT


def extract_calls(
    file: Union[str, Path],
    library_name: str,
    source: Optional[str] = None,
) -> list[CallSite]:
    """Extract every call of ``library_name`` from one source file.

    Returns inner calls before their consumers.  A file that fails to parse
    contributes no call sites; the failure is raised as :class:`ParseFailure`
    for the caller to record.
    """
    path = str(file)
    if source is None:
        source = Path(file).read_text(encoding="utf-8")
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise ParseFailure(path, str(exc)) from exc
    bindings = collect_bindings(tree)
    return _CallExtractor(source, path, library_name, bindings).run(tree)


def restore_call_path(call_expr: str, bindings: FileBindings) -> str:
    """Restore one call expression to its fully qualified dotted path."""
    try:
        node = ast.parse(call_expr, mode="eval").body
    except SyntaxError as exc:
        raise Unresolved(f"unparseable call expression: {call_expr!r}") from exc
    if isinstance(node, ast.Await):
        node = node.value
    if not isinstance(node, ast.Call):
        raise Unresolved(f"not a call expression: {call_expr!r}")
    chain = _expr_key(node.func)
    resolved = resolve_dotted(chain, bindings) if chain else None
    if resolved is None:
        raise Unresolved(f"no import binding reaches {call_expr!r}")
    return resolved


def classify_passing(site: CallSite, sig: ApiSignature) -> dict[str, Passing]:
    """Decide, for every parameter of ``sig``, how ``site`` supplies it.

    Positional arguments bind to positional parameters in order with overflow
    going to ``*args``; keyword arguments bind by name with unknown names
    going to ``**kwargs``.  Every unbound parameter is reported as unpassed.
    """
    result: dict[str, Passing] = {p.name: Passing.NOT_PASSED for p in sig.parameters}
    positional = sig.positional
    var_pos = sig.var_positional
    var_kw = sig.var_keyword

    pos_args = [a for a in site.args if a.passing is Passing.POSITIONAL]
    kw_args = [a for a in site.args if a.passing is Passing.KEYWORD]

    for a in pos_args:
        if a.expr_text.startswith("*"):
            raise BindingError(f"{site.location}: starred argument defeats static binding")
    for i, _ in enumerate(pos_args):
        if i < len(positional):
            result[positional[i].name] = Passing.POSITIONAL
        elif var_pos is not None:
            result[var_pos.name] = Passing.POSITIONAL
        else:
            raise BindingError(
                f"{site.location}: {len(pos_args)} positional arguments exceed arity "
                f"{len(positional)}"
            )

    for a in kw_args:
        if a.keyword_name is None:
            raise BindingError(f"{site.location}: **expansion defeats static binding")
        param = sig.param(a.keyword_name)
        if param is not None and param.kind in (
            ParamKind.POSITIONAL,
            ParamKind.KEYWORD_ONLY,
        ):
            if result[param.name] is not Passing.NOT_PASSED:
                raise BindingError(
                    f"{site.location}: parameter {param.name!r} passed twice"
                )
            result[param.name] = Passing.KEYWORD
        elif var_kw is not None:
            result[var_kw.name] = Passing.KEYWORD
        else:
            raise BindingError(
                f"{site.location}: unknown keyword {a.keyword_name!r}"
            )

    return result
