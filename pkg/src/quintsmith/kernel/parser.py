"""Recursive-descent parser for the modeling-language subset.

The grammar is a practical slice of Quint: modules, type declarations
(aliases, records, sum types), state variables, pure values and
definitions, actions with nondet bindings and primed assignments, and a
conventional expression language (records, tuples, lists, sets, maps,
match, if/else, lambdas, method-style calls).

Patterns accept only wildcards, lower-case binders, and constructors;
a literal in pattern position is a parse error, reported with the same
wording Quint's own frontend uses.
"""

from __future__ import annotations

from .diagnostics import PARSE, Diagnostic, ParseError
from .syntax import (
    DDef, DImport, DSumType, DTypeAlias, DVal, DVar, Decl, EAll, EAny,
    EBinop, EBool, ECall, EField, EIf, EIndex, EInt, ELambda, ELet, EList,
    EMap, EMatch, EName, ENondet, EPrime, ERecord, ERecordUpdate, ESet,
    EStr, ETuple, ETupleGet, EUnop, Expr, Module, PBind, PCtor, Pattern,
    Pos, PWild, TMapT, TName, TRecordT, TTupleT, TypeExpr,
)
from .tokens import Token, lex

_TUPLE_FIELD = None  # placeholder to keep imports tidy


class _Parser:
    def __init__(self, source: str, file: str):
        self.source = source
        self.file = file
        self.lines = source.splitlines()
        self.toks = lex(source, file)
        self.i = 0

    # ------------------------------------------------------------ utils

    def peek(self, offset: int = 0) -> Token:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def continues_line(self) -> bool:
        # True when the next token sits on the same line as the last one
        # consumed. Postfix '[', call '(', and infix '-' only bind across
        # a line when this holds; otherwise a new expression starts,
        # which keeps block bindings from swallowing the line below.
        return self.i > 0 and self.peek().line == self.toks[self.i - 1].line

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def pos(self, tok: Token) -> Pos:
        return Pos(tok.line, tok.col, tok.width(), tok.offset)

    def _span_from(self, start: Pos) -> Pos:
        """Position covering start through the last consumed token (same line)."""
        last = self.toks[self.i - 1]
        end = last.offset + last.width()
        if start.offset >= 0 and last.line == start.line and end > start.offset:
            return Pos(start.line, start.col, end - start.offset, start.offset)
        return start

    def error(self, tok: Token, message: str) -> ParseError:
        src = self.lines[tok.line - 1] if 0 < tok.line <= len(self.lines) else ""
        return ParseError(Diagnostic(PARSE, message, self.file, tok.line, tok.col, tok.width(), src))

    def mismatch(self, tok: Token, expected: str) -> ParseError:
        shown = tok.text if tok.kind != "EOF" else "<EOF>"
        return self.error(tok, f"mismatched input '{shown}' expecting {expected}")

    def expect(self, kind: str, expected: str | None = None) -> Token:
        if not self.at(kind):
            raise self.mismatch(self.peek(), expected or f"'{kind}'")
        return self.advance()

    def ident(self) -> Token:
        if not self.at("LOW_ID", "CAP_ID"):
            raise self.mismatch(self.peek(), "an identifier")
        return self.advance()

    # ----------------------------------------------------------- module

    def parse_module(self) -> Module:
        self.expect("module")
        name = self.ident().text
        self.expect("{")
        decls: list[Decl] = []
        while not self.at("}"):
            if self.at("EOF"):
                raise self.mismatch(self.peek(), "'}'")
            start = self.peek().offset
            decl = self.parse_decl()
            last = self.toks[self.i - 1]
            decl.span = (start, last.offset + last.width())
            decls.append(decl)
        self.expect("}")
        if not self.at("EOF"):
            raise self.mismatch(self.peek(), "<EOF>")
        return Module(name, decls, self.source, self.file)

    def parse_decl(self) -> Decl:
        tok = self.peek()
        if tok.kind == "import":
            return self.parse_import()
        if tok.kind == "type":
            return self.parse_typedecl()
        if tok.kind == "var":
            self.advance()
            name = self.expect("LOW_ID", "a variable name").text
            self.expect(":")
            ty = self.parse_type()
            return DVar(name, ty, pos=self.pos(tok))
        if tok.kind == "pure":
            self.advance()
            if self.at("def"):
                return self.parse_def("pure", tok)
            if self.at("val"):
                return self.parse_val(True, tok)
            raise self.mismatch(self.peek(), "'def' or 'val'")
        if tok.kind == "def":
            return self.parse_def("pure", tok)
        if tok.kind == "val":
            return self.parse_val(True, tok)
        if tok.kind == "action":
            return self.parse_def("action", tok)
        raise self.mismatch(tok, "a declaration")

    def parse_import(self) -> Decl:
        tok = self.expect("import")
        name = self.ident().text
        self.expect(".")
        self.expect("*")
        self.expect("from")
        path = self.expect("STR", "a module path string")
        return DImport(name, str(path.value), pos=self.pos(tok))

    def parse_typedecl(self) -> Decl:
        tok = self.expect("type")
        name = self.expect("CAP_ID", "a type name").text
        self.expect("=")
        # Sum type when the right side starts with | (single-variant form),
        # or is Ctor(payload), or has | alternatives.
        leading_bar = self.at("|")
        if leading_bar:
            self.advance()
        if leading_bar or (
                self.at("CAP_ID")
                and (self.peek(1).kind == "(" or self._bar_follows())):
            ctors: list[tuple[str, TypeExpr | None]] = []
            while True:
                cname = self.expect("CAP_ID", "a constructor name").text
                payload = None
                if self.at("("):
                    self.advance()
                    payload = self.parse_type()
                    self.expect(")")
                ctors.append((cname, payload))
                if self.at("|"):
                    self.advance()
                    continue
                break
            return DSumType(name, ctors, pos=self.pos(tok))
        target = self.parse_type()
        return DTypeAlias(name, target, pos=self.pos(tok))

    def _bar_follows(self) -> bool:
        # After a bare CAP_ID, a | at the same nesting level marks a sum type.
        return self.peek(1).kind == "|"

    def parse_val(self, pure: bool, tok: Token) -> Decl:
        self.expect("val")
        name = self.ident().text
        ty = None
        if self.at(":"):
            self.advance()
            ty = self.parse_type()
        self.expect("=")
        value = self.parse_expr()
        return DVal(name, ty, value, pure=pure, pos=self.pos(tok))

    def parse_def(self, kind: str, tok: Token) -> Decl:
        self.advance()  # def | action
        name = self.expect("LOW_ID", "a definition name").text
        params: list[tuple[str, TypeExpr]] = []
        has_parens = False
        if self.at("("):
            has_parens = True
            self.advance()
            while not self.at(")"):
                pname = self.expect("LOW_ID", "a parameter name").text
                self.expect(":")
                pty = self.parse_type()
                params.append((pname, pty))
                if self.at(","):
                    self.advance()
            self.expect(")")
        ret = None
        if self.at(":"):
            self.advance()
            ret = self.parse_type()
        self.expect("=")
        body = self.parse_expr()
        return DDef(name, params, ret, body, kind=kind, has_parens=has_parens,
                    pos=self.pos(tok))

    # ------------------------------------------------------------ types

    def parse_type(self) -> TypeExpr:
        left = self.parse_type_atom()
        if self.at("->"):
            self.advance()
            right = self.parse_type()
            return TMapT(left, right, pos=left.pos)
        return left

    def parse_type_atom(self) -> TypeExpr:
        tok = self.peek()
        if tok.kind == "(":
            self.advance()
            items = [self.parse_type()]
            while self.at(","):
                self.advance()
                items.append(self.parse_type())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            return TTupleT(items, pos=self.pos(tok))
        if tok.kind == "{":
            self.advance()
            fields: list[tuple[str, TypeExpr]] = []
            while not self.at("}"):
                fname = self.expect("LOW_ID", "a field name").text
                self.expect(":")
                fields.append((fname, self.parse_type()))
                if self.at(","):
                    self.advance()
            self.expect("}")
            return TRecordT(fields, pos=self.pos(tok))
        if tok.kind in ("CAP_ID", "LOW_ID"):
            self.advance()
            args: list[TypeExpr] = []
            if self.at("["):
                self.advance()
                args.append(self.parse_type())
                while self.at(","):
                    self.advance()
                    args.append(self.parse_type())
                self.expect("]")
            return TName(tok.text, args, pos=self.pos(tok))
        raise self.mismatch(tok, "a type")

    # ------------------------------------------------------- expressions

    def parse_expr(self) -> Expr:
        if self._lambda_ahead():
            return self.parse_lambda()
        return self.parse_or()

    def _lambda_ahead(self) -> bool:
        if self.at("LOW_ID", "UNDERSCORE") and self.peek(1).kind == "=>":
            return True
        if self.at("("):
            depth = 0
            j = self.i
            while j < len(self.toks):
                k = self.toks[j].kind
                if k == "(":
                    depth += 1
                elif k == ")":
                    depth -= 1
                    if depth == 0:
                        return self.toks[j + 1].kind == "=>"
                elif k == "EOF":
                    return False
                j += 1
        return False

    def parse_lambda(self) -> Expr:
        tok = self.peek()
        params: list[str] = []
        if self.at("LOW_ID", "UNDERSCORE"):
            params.append(self.advance().text)
        else:
            self.expect("(")
            while not self.at(")"):
                params.append(self.expect("LOW_ID", "a parameter name").text)
                if self.at(","):
                    self.advance()
            self.expect(")")
        self.expect("=>")
        body = self.parse_expr()
        return ELambda(params, body, pos=self.pos(tok))

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("or"):
            tok = self.advance()
            right = self.parse_and()
            left = EBinop("or", left, right, pos=self.pos(tok))
        return left

    def parse_and(self) -> Expr:
        left = self.parse_not()
        while self.at("and"):
            tok = self.advance()
            right = self.parse_not()
            left = EBinop("and", left, right, pos=self.pos(tok))
        return left

    def parse_not(self) -> Expr:
        if self.at("not"):
            tok = self.advance()
            operand = self.parse_not()
            return EUnop("not", operand, pos=self.pos(tok))
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        if self.at("==", "!=", "<", "<=", ">", ">="):
            tok = self.advance()
            right = self.parse_add()
            return EBinop(tok.kind, left, right, pos=self.pos(tok))
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.at("+") or (self.at("-") and self.continues_line()):
            tok = self.advance()
            right = self.parse_mul()
            left = EBinop(tok.kind, left, right, pos=self.pos(tok))
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while self.at("*", "/", "%"):
            tok = self.advance()
            right = self.parse_unary()
            left = EBinop(tok.kind, left, right, pos=self.pos(tok))
        return left

    def parse_unary(self) -> Expr:
        if self.at("-"):
            tok = self.advance()
            operand = self.parse_unary()
            return EUnop("-", operand, pos=self.pos(tok))
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_atom()
        start = expr.pos
        while True:
            if self.at("."):
                self.advance()
                name_tok = self.peek()
                if name_tok.kind not in ("LOW_ID", "CAP_ID"):
                    raise self.mismatch(name_tok, "a field or method name")
                self.advance()
                name = name_tok.text
                if self.at("(") and self.continues_line():
                    args = self.parse_call_args()
                    expr = ECall(name, [expr] + args, method_receiver=True,
                                 pos=self._span_from(start))
                elif len(name) > 1 and name[0] == "_" and name[1:].isdigit():
                    expr = ETupleGet(expr, int(name[1:]), pos=self._span_from(start))
                else:
                    expr = EField(expr, name, pos=self._span_from(start))
            elif self.at("[") and self.continues_line():
                self.advance()
                index = self.parse_expr()
                self.expect("]")
                expr = EIndex(expr, index, pos=self._span_from(start))
            else:
                return expr

    def parse_call_args(self) -> list[Expr]:
        self.expect("(")
        args: list[Expr] = []
        while not self.at(")"):
            args.append(self.parse_expr())
            if self.at(","):
                self.advance()
        self.expect(")")
        return args

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return EInt(int(tok.value), pos=self.pos(tok))
        if tok.kind == "BOOL":
            self.advance()
            return EBool(bool(tok.value), pos=self.pos(tok))
        if tok.kind == "STR":
            self.advance()
            return EStr(str(tok.value), pos=self.pos(tok))
        if tok.kind == "if":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_expr()
            self.expect("else")
            otherwise = self.parse_expr()
            return EIf(cond, then, otherwise, pos=self.pos(tok))
        if tok.kind == "match":
            return self.parse_match()
        if tok.kind in ("all", "any"):
            self.advance()
            self.expect("{")
            items = [self.parse_expr()]
            while self.at(","):
                self.advance()
                if self.at("}"):
                    break
                items.append(self.parse_expr())
            self.expect("}")
            node = EAll if tok.kind == "all" else EAny
            return node(items, pos=self.pos(tok))
        if tok.kind == "PRIME_ID":
            self.advance()
            self.expect("=")
            value = self.parse_expr()
            return EPrime(tok.text, value, pos=self.pos(tok))
        if tok.kind == "(":
            self.advance()
            items = [self.parse_expr()]
            while self.at(","):
                self.advance()
                items.append(self.parse_expr())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            return ETuple(items, pos=self.pos(tok))
        if tok.kind == "[":
            self.advance()
            items = []
            while not self.at("]"):
                items.append(self.parse_expr())
                if self.at(","):
                    self.advance()
            self.expect("]")
            return EList(items, pos=self.pos(tok))
        if tok.kind == "{":
            return self.parse_braces()
        if (tok.kind == "CAP_ID" and tok.text in ("Map", "Set", "List")
                and self.peek(1).kind == "(" and self.peek(1).line == tok.line):
            self.advance()
            if tok.text == "Map":
                self.expect("(")
                pairs: list[tuple[Expr, Expr]] = []
                while not self.at(")"):
                    key = self.parse_expr()
                    self.expect("->")
                    pairs.append((key, self.parse_expr()))
                    if self.at(","):
                        self.advance()
                self.expect(")")
                return EMap(pairs, pos=self.pos(tok))
            args = self.parse_call_args()
            if tok.text == "Set":
                return ESet(args, pos=self.pos(tok))
            return EList(args, pos=self.pos(tok))
        if tok.kind in ("LOW_ID", "CAP_ID"):
            self.advance()
            if self.at("(") and self.continues_line():
                args = self.parse_call_args()
                return ECall(tok.text, args, pos=self.pos(tok))
            return EName(tok.text, pos=self.pos(tok))
        raise self.mismatch(tok, "an expression")

    def parse_braces(self) -> Expr:
        """Record literal, record update, or a block of bindings + expression."""
        tok = self.expect("{")
        if self.at("}"):
            self.advance()
            return ERecord([], pos=self.pos(tok))
        if self.at("..."):
            self.advance()
            base = self.parse_expr()
            fields: list[tuple[str, Expr]] = []
            while self.at(","):
                self.advance()
                if self.at("}"):
                    break
                fname = self.expect("LOW_ID", "a field name").text
                self.expect(":")
                fields.append((fname, self.parse_expr()))
            self.expect("}")
            return ERecordUpdate(base, fields, pos=self.pos(tok))
        if self.at("LOW_ID") and self.peek(1).kind == ":":
            fields = []
            while not self.at("}"):
                fname = self.expect("LOW_ID", "a field name").text
                self.expect(":")
                fields.append((fname, self.parse_expr()))
                if self.at(","):
                    self.advance()
            self.expect("}")
            return ERecord(fields, pos=self.pos(tok))
        # Block: val/nondet bindings followed by one result expression.
        bindings: list[tuple[str, str, Expr, TypeExpr | None]] = []
        while self.at("val", "nondet"):
            btok = self.advance()
            name = self.expect("LOW_ID", "a binding name").text
            btype = None
            if self.at(":"):
                self.advance()
                btype = self.parse_type()
            self.expect("=")
            value = self.parse_expr()
            bindings.append((btok.kind, name, value, btype))
        result = self.parse_expr()
        self.expect("}")
        for bkind, name, value, btype in reversed(bindings):
            if bkind == "val":
                result = ELet(name, value, result, btype, pos=value.pos)
            else:
                result = ENondet(name, value, result, pos=value.pos)
        return result

    def parse_match(self) -> Expr:
        tok = self.expect("match")
        scrutinee = self.parse_expr()
        self.expect("{")
        arms: list[tuple[Pattern, Expr]] = []
        while self.at("|"):
            self.advance()
            pat = self.parse_pattern()
            self.expect("=>")
            arms.append((pat, self.parse_expr()))
        self.expect("}")
        if not arms:
            raise self.mismatch(self.peek(), "'|'")
        return EMatch(scrutinee, arms, pos=self.pos(tok))

    def parse_pattern(self) -> Pattern:
        tok = self.peek()
        if tok.kind == "UNDERSCORE":
            self.advance()
            return PWild(pos=self.pos(tok))
        if tok.kind == "LOW_ID":
            self.advance()
            return PBind(tok.text, pos=self.pos(tok))
        if tok.kind == "CAP_ID":
            self.advance()
            args: list[Pattern] = []
            parens = False
            if self.at("("):
                parens = True
                self.advance()
                while not self.at(")"):
                    args.append(self.parse_pattern())
                    if self.at(","):
                        self.advance()
                self.expect(")")
            return PCtor(tok.text, args, parens, pos=self.pos(tok))
        # Literals and anything else are not legal patterns in this subset.
        raise self.mismatch(tok, "{'_', LOW_ID, CAP_ID}")


def parse_module(source: str, file: str = "<model>") -> Module:
    """Parse a module; raises ParseError with a QNT000 diagnostic on failure."""
    return _Parser(source, file).parse_module()


def parse_expression(source: str, file: str = "<expr>") -> Expr:
    """Parse a single expression (used by I/O specs); must consume all input."""
    p = _Parser(source, file)
    expr = p.parse_expr()
    if not p.at("EOF"):
        raise p.mismatch(p.peek(), "<EOF>")
    return expr
