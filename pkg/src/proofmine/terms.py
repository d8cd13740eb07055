"""Term trees for lemma statements and proof goals, plus a small precedence parser."""

from __future__ import annotations

from dataclasses import dataclass


class TermError(ValueError):
    """Statement text that cannot be turned into a term tree."""


class UnbalancedDelimiters(TermError):
    pass


class EmptyStatement(TermError):
    pass


@dataclass(frozen=True)
class TermTree:
    """Ordered tree keyed by head symbol; leaves have no children."""

    symbol: str
    children: tuple["TermTree", ...] = ()

    def __post_init__(self) -> None:
        if not self.symbol:
            raise ValueError("term symbol must be non-empty")

    def iter_nodes(self):
        yield self
        for child in self.children:
            yield from child.iter_nodes()

    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    def top_symbols(self) -> tuple[str, str | None, str | None]:
        """Head symbol plus the heads of the first two children."""
        first = self.children[0].symbol if self.children else None
        second = self.children[1].symbol if len(self.children) > 1 else None
        return self.symbol, first, second

    def to_dict(self) -> dict:
        out: dict = {"symbol": self.symbol}
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TermTree":
        kids = tuple(cls.from_dict(c) for c in data.get("children", ()))
        return cls(data["symbol"], kids)


BINDERS = ("forall", "exists", "fun")

# Binding levels, loosest to tightest; application binds tighter than all of them.
OPERATOR_LEVELS: tuple[dict[str, str], ...] = (
    {"->": "right"},
    {"||": "right", "\\/": "right"},
    {"&&": "right", "/\\": "right"},
    {"=": "left", "==": "left", "!=": "left", "<>": "left",
     "<": "left", "<=": "left", ">": "left", ">=": "left", "\\in": "left"},
    {"+": "left", "-": "left", "++": "right", "::": "right"},
    {"*": "left", "*m": "left", "/": "left"},
    {"^": "right"},
)
_APP_LEVEL = len(OPERATOR_LEVELS)
_ATOM_LEVEL = _APP_LEVEL + 1
_OP_LEVEL = {op: lvl for lvl, ops in enumerate(OPERATOR_LEVELS) for op in ops}
_OP_ASSOC = {op: assoc for ops in OPERATOR_LEVELS for op, assoc in ops.items()}
_PREFIX = ("-", "~")

_TWO_CHAR_OPS = ("=>", "->", "||", "&&", "==", "!=", "<=", ">=", "<>", "++", "\\/", "/\\", "::")
_GROUP_OPENERS = {"[": "]", "{": "}"}


def _group_end(text: str, start: int) -> int:
    """End index (exclusive) of the balanced group opening at start."""
    stack = []
    closers = {"(": ")", "[": "]", "{": "}"}
    i = start
    while i < len(text):
        c = text[i]
        if c in closers:
            stack.append(closers[c])
        elif c in ")]}":
            if not stack or stack[-1] != c:
                raise UnbalancedDelimiters(f"mismatched {c!r}")
            stack.pop()
            if not stack:
                return i + 1
        i += 1
    raise UnbalancedDelimiters(f"unclosed {text[start]!r}")


def _word_end(text: str, start: int) -> int:
    n = len(text)
    j = start
    if text[j] == "\\":
        j += 1
    while j < n:
        c = text[j]
        if c.isalnum() or c in "_'%":
            j += 1
            continue
        if c == "`":
            j += 1
            while j < n and (text[j] == "!" or text[j].isalnum() or text[j] in "_'%"):
                j += 1
            continue
        if c == "." and j + 1 < n and (text[j + 1].isalnum() or text[j + 1] == "_"):
            j += 1
            continue
        if c == "." and j + 2 < n and text[j + 1] == "+" and text[j + 2].isdigit():
            j += 2
            continue
        break
    return j


def _lex(text: str) -> list[tuple[str, str]]:
    """Tokens as (kind, text); kinds: '(' ')' ',' ':' 'op' 'atom'."""
    tokens: list[tuple[str, str]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "(":
            tokens.append(("(", "("))
            i += 1
            continue
        if c == ")":
            tokens.append((")", ")"))
            i += 1
            continue
        if c in _GROUP_OPENERS:
            j = _group_end(text, i)
            tokens.append(("atom", " ".join(text[i:j].split())))
            i = j
            continue
        if c in "]}":
            raise UnbalancedDelimiters(f"unexpected {c!r}")
        if c == ",":
            tokens.append((",", ","))
            i += 1
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(("op", two))
            i += 2
            continue
        if c == ":":
            if text[i + 1:i + 2] == "=":
                tokens.append(("op", ":="))
                i += 2
                continue
            tokens.append((":", ":"))
            i += 1
            continue
        if text.startswith("\\in", i) and not (text[i + 3:i + 4].isalnum() or text[i + 3:i + 4] in ("_", "'")):
            tokens.append(("op", "\\in"))
            i += 3
            continue
        if c == "*":
            nxt = text[i + 1:i + 2]
            after = text[i + 2:i + 3]
            if nxt == "m" and not (after.isalnum() or after in ("_", "'")):
                tokens.append(("op", "*m"))
                i += 2
                continue
            tokens.append(("op", "*"))
            i += 1
            continue
        if c in "=<>+-/^~":
            tokens.append(("op", c))
            i += 1
            continue
        j = _word_end(text, i)
        if j == i:
            # opaque single character, kept as a leaf
            tokens.append(("atom", c))
            i += 1
            continue
        tokens.append(("atom", text[i:j]))
        i = j
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse_expr(self, level: int = 0) -> TermTree:
        if level >= _APP_LEVEL:
            return self.parse_application()
        node = self.parse_expr(level + 1)
        while True:
            tok = self.peek()
            if tok is None or tok[0] != "op":
                break
            op = tok[1]
            if _OP_LEVEL.get(op) != level:
                break
            self.advance()
            if _OP_ASSOC[op] == "right":
                rhs = self.parse_expr(level)
            else:
                rhs = self.parse_expr(level + 1)
            node = TermTree(op, (node, rhs))
        return node

    def parse_application(self) -> TermTree:
        parts = [self.parse_atom()]
        while True:
            tok = self.peek()
            if tok is not None and tok[0] in ("(", "atom"):
                parts.append(self.parse_atom())
            else:
                break
        if len(parts) == 1:
            return parts[0]
        head = parts[0]
        if not head.children:
            return TermTree(head.symbol, tuple(parts[1:]))
        return TermTree("@", tuple(parts))

    def parse_atom(self) -> TermTree:
        tok = self.peek()
        if tok is None:
            raise UnbalancedDelimiters("unexpected end of statement")
        kind, text = tok
        if kind == "atom":
            if text in BINDERS:
                return self.parse_binder()
            self.advance()
            return TermTree(text)
        if kind == "(":
            self.advance()
            nxt = self.peek()
            if nxt is not None and nxt[0] == ")":
                self.advance()
                return TermTree("()")
            node = self.parse_expr(0)
            nxt = self.peek()
            if nxt is not None and nxt[0] == ":":
                self.advance()
                node = TermTree(":", (node, self.parse_expr(0)))
                nxt = self.peek()
            if nxt is not None and nxt[0] == ",":
                items = [node]
                while self.peek() is not None and self.peek()[0] == ",":
                    self.advance()
                    items.append(self.parse_expr(0))
                node = TermTree(",", tuple(items))
            closing = self.peek()
            if closing is None or closing[0] != ")":
                raise UnbalancedDelimiters("missing ')'")
            self.advance()
            return node
        if kind == "op" and text in _PREFIX:
            self.advance()
            return TermTree(text, (self.parse_expr(_APP_LEVEL),))
        raise UnbalancedDelimiters(f"unexpected {text!r}")

    def parse_binder(self) -> TermTree:
        kw = self.advance()[1]
        stop_arrow = kw == "fun"
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                sep = "'=>'" if stop_arrow else "','"
                raise UnbalancedDelimiters(f"{kw} binder without {sep}")
            kind, text = tok
            if depth == 0:
                if stop_arrow and kind == "op" and text == "=>":
                    self.advance()
                    break
                if not stop_arrow and kind == ",":
                    self.advance()
                    break
            if kind == "(":
                depth += 1
            elif kind == ")":
                if depth == 0:
                    raise UnbalancedDelimiters("unexpected ')' in binder")
                depth -= 1
            self.advance()
        body = self.parse_expr(0)
        return TermTree(kw, (body,))


def parse_term_tree(text: str) -> TermTree:
    """Parse statement or goal text into a term tree."""
    tokens = _lex(text)
    if not tokens:
        raise EmptyStatement("empty statement")
    parser = _Parser(tokens)
    node = parser.parse_expr(0)
    leftover = parser.peek()
    if leftover is not None:
        raise UnbalancedDelimiters(f"trailing {leftover[1]!r} in statement")
    return node


def _node_level(node: TermTree) -> int:
    if node.symbol in BINDERS and len(node.children) == 1:
        return -1
    if node.symbol == "," and node.children:
        return _ATOM_LEVEL
    if node.symbol == ":" and len(node.children) == 2:
        return _ATOM_LEVEL
    if node.symbol in _PREFIX and len(node.children) == 1:
        return _APP_LEVEL
    if node.symbol in _OP_LEVEL and len(node.children) == 2:
        return _OP_LEVEL[node.symbol]
    if node.children:
        return _APP_LEVEL
    return _ATOM_LEVEL


def _app_operand(node: TermTree) -> str:
    rendered = format_term(node)
    return rendered if _node_level(node) >= _ATOM_LEVEL else f"({rendered})"


def format_term(node: TermTree) -> str:
    """Render a tree so that parse(format(t)) == t; binder names print as '_'."""
    sym = node.symbol
    if sym in BINDERS and len(node.children) == 1:
        body = format_term(node.children[0])
        return f"fun _ => {body}" if sym == "fun" else f"{sym} _, {body}"
    if sym == "," and node.children:
        return "(" + ", ".join(format_term(c) for c in node.children) + ")"
    if sym == ":" and len(node.children) == 2:
        return f"({format_term(node.children[0])} : {format_term(node.children[1])})"
    if sym in _PREFIX and len(node.children) == 1:
        child = node.children[0]
        inner = format_term(child)
        if _node_level(child) < _APP_LEVEL:
            inner = f"({inner})"
        return f"{sym} {inner}"
    if sym in _OP_LEVEL and len(node.children) == 2:
        lvl = _OP_LEVEL[sym]
        assoc = _OP_ASSOC[sym]
        left, right = node.children
        rendered_l = format_term(left)
        rendered_r = format_term(right)
        if _node_level(left) < lvl or (_node_level(left) == lvl and assoc == "right"):
            rendered_l = f"({rendered_l})"
        if _node_level(right) < lvl or (_node_level(right) == lvl and assoc == "left"):
            rendered_r = f"({rendered_r})"
        return f"{rendered_l} {sym} {rendered_r}"
    if node.children:
        if sym == "@":
            return " ".join(_app_operand(c) for c in node.children)
        return " ".join([sym] + [_app_operand(c) for c in node.children])
    return sym
