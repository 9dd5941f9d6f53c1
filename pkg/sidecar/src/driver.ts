/**
 * The Python program that runs inside the designated environment.  It reads
 * the request JSON from stdin and prints one JSON response: the reflection
 * has to happen in the target interpreter itself, since only that process
 * can import the library version under inspection.
 */

export const PYTHON_DRIVER = `
import importlib
import inspect
import json
import sys
import traceback

_KIND_NAMES = {
    inspect.Parameter.POSITIONAL_ONLY: "positional",
    inspect.Parameter.POSITIONAL_OR_KEYWORD: "positional",
    inspect.Parameter.KEYWORD_ONLY: "keyword_only",
    inspect.Parameter.VAR_POSITIONAL: "var_positional",
    inspect.Parameter.VAR_KEYWORD: "var_keyword",
}


def reflect(module_path, chain):
    try:
        obj = importlib.import_module(module_path)
    except ImportError as exc:
        return {"error": {"type": "ImportError", "message": str(exc)}}
    for attr in [a for a in chain.split(".") if a]:
        try:
            obj = getattr(obj, attr)
        except AttributeError as exc:
            return {"error": {"type": "AttributeError", "message": str(exc)}}
    target = obj.__init__ if inspect.isclass(obj) else obj
    try:
        sig = inspect.signature(target)
    except (ValueError, TypeError) as exc:
        return {"error": {"type": "NoSignature", "message": str(exc)}}

    params = []
    counters = {}
    for name, p in sig.parameters.items():
        if name in ("self", "cls") and not params:
            continue
        kind = _KIND_NAMES[p.kind]
        index = counters.get(kind, 0)
        counters[kind] = index + 1
        params.append(
            {
                "name": name,
                "kind": kind,
                "index": index,
                "has_default": p.default is not inspect.Parameter.empty,
                "default": None
                if p.default is inspect.Parameter.empty
                else repr(p.default),
                "annotation": None
                if p.annotation is inspect.Parameter.empty
                else inspect.formatannotation(p.annotation),
            }
        )
    qualified = module_path + ("." + chain if chain else "")
    return {
        "qualified_name": qualified,
        "version": "",
        "origin": "reflected",
        "params": params,
    }


def execute(snippet):
    try:
        exec(snippet, {"__name__": "__sidecar__"})
    except BaseException as exc:
        return {
            "ok": False,
            "error": {
                "type": type(exc).__name__,
                "message": str(exc),
                "traceback": traceback.format_exc(),
            },
        }
    return {"ok": True}


def main():
    request = json.loads(sys.stdin.read())
    if request.get("mode") == "execute":
        response = execute(request.get("snippet", ""))
    else:
        response = reflect(request["module_path"], request.get("attribute_chain", ""))
    sys.stdout.write(json.dumps(response))
    sys.stdout.write("\\n")


if __name__ == "__main__":
    main()
`;
