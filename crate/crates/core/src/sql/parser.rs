//! Recursive-descent parser for the SELECT subset.

use super::ast::*;
use super::error::{describe_plain, ParseError, ParseErrorKind};
use super::token::{tokenize, ConstantKind, Span, Token, TokenKind};
use super::{Clause, SourceMap};

/// Parses one SELECT statement. A trailing semicolon is optional.
pub fn parse_select(text: &str) -> Result<SelectAst, ParseError> {
    parse_select_with_map(text).map(|(ast, _)| ast)
}

/// Like [`parse_select`], also returning where each top-level clause sits in
/// the source.
pub fn parse_select_with_map(text: &str) -> Result<(SelectAst, SourceMap), ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser::new(&tokens, text.len());
    if tokens.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::EmptyInput,
            Span::new(0, 0),
            "nothing".into(),
            "The query is empty.",
        )
        .with_hint("start with SELECT followed by the columns you want"));
    }
    let ast = p.statement()?;
    Ok((ast, p.map))
}

/// Parses a standalone expression, e.g. a property value or CHECK condition.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser::new(&tokens, text.len());
    if tokens.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::EmptyInput,
            Span::new(0, 0),
            "nothing".into(),
            "The expression is empty.",
        ));
    }
    let e = p.expr()?;
    if let Some(tok) = p.peek() {
        return Err(p.unexpected(tok, "The expression has extra words at the end.", &["the end of the expression"]));
    }
    Ok(e)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    source_len: usize,
    depth: usize,
    map: SourceMap,
}

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token], source_len: usize) -> Self {
        Parser { tokens, pos: 0, source_len, depth: 0, map: SourceMap::default() }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + n)
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn last_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.pos - 1].span.end
        }
    }

    fn end_span(&self) -> Span {
        Span::new(self.source_len, self.source_len)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(kw))
    }

    fn at_symbol(&self, sym: &str) -> bool {
        self.peek().is_some_and(|t| t.is_symbol(sym))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        if self.at_symbol(sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, tok: &Token, message: &str, expected: &[&str]) -> ParseError {
        ParseError::new(ParseErrorKind::UnexpectedToken, tok.span, describe_plain(tok), message).expecting(expected)
    }

    fn unexpected_end(&self, message: &str, expected: &[&str]) -> ParseError {
        ParseError::new(ParseErrorKind::UnexpectedEnd, self.end_span(), "the end of the query".into(), message)
            .expecting(expected)
    }

    fn expect_keyword(&mut self, kw: &str, context: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.is_keyword(kw) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self
                .unexpected(t, &format!("The word {kw} is needed {context}."), &[kw])
                .with_hint(format!("write {kw} {context}"))),
            None => Err(self
                .unexpected_end(&format!("The query stops before the word {kw} that is needed {context}."), &[kw])
                .with_hint(format!("write {kw} {context}"))),
        }
    }

    fn stray_semicolon(&self, tok: &Token) -> ParseError {
        ParseError::new(
            ParseErrorKind::StraySemicolon,
            tok.span,
            "a semicolon".into(),
            "A semicolon appears in the middle of the statement. A statement ends with a single semicolon at the very end.",
        )
        .expecting(&["the rest of the statement"])
        .with_hint("remove the semicolon or move it to the end of the query")
    }

    fn statement(&mut self) -> Result<SelectAst, ParseError> {
        if let Some(t) = self.peek() {
            if let Some(kw) = t.keyword() {
                if matches!(kw.as_str(), "INSERT" | "UPDATE" | "DELETE" | "CREATE" | "WITH") {
                    return Err(ParseError::new(
                        ParseErrorKind::Unsupported,
                        t.span,
                        describe_plain(t),
                        format!("Only SELECT queries can be written in this editor, and this one starts with {kw}."),
                    )
                    .with_hint("use the creation forms for tables and databases, or start the query with SELECT"));
                }
            }
        }
        let ast = self.query(true)?;
        if let Some(t) = self.peek() {
            if t.is_symbol(";") {
                self.pos += 1;
                if self.peek().is_some() {
                    return Err(self.stray_semicolon(t));
                }
            } else if t.is_symbol(")") {
                return Err(ParseError::new(
                    ParseErrorKind::UnbalancedParenthesis,
                    t.span,
                    describe_plain(t),
                    "There is a closing parenthesis without a matching opening one.",
                )
                .with_hint("remove the extra closing parenthesis"));
            } else {
                return Err(self.trailing(t));
            }
        }
        Ok(ast)
    }

    fn trailing(&self, t: &Token) -> ParseError {
        if let Some(kw) = t.keyword() {
            if matches!(kw.as_str(), "LIMIT" | "OFFSET") {
                return self.unsupported(t, &kw);
            }
            if matches!(kw.as_str(), "WHERE" | "GROUP" | "HAVING" | "FROM") {
                return self
                    .unexpected(t, &format!("The {kw} part is in the wrong place."), &["the end of the query"])
                    .with_hint("write the parts in this order: SELECT, FROM, WHERE, GROUP BY, HAVING, ORDER BY");
            }
        }
        self.unexpected(t, "The query has extra words after it should have ended.", &["the end of the query"])
            .with_hint("check for a missing comma, AND or operator before this point")
    }

    fn unsupported(&self, t: &Token, what: &str) -> ParseError {
        ParseError::new(
            ParseErrorKind::Unsupported,
            t.span,
            describe_plain(t),
            format!("{what} is not supported by this editor yet."),
        )
        .with_hint("rewrite the query without it")
    }

    /// A SELECT block optionally followed by set operations and ORDER BY.
    fn query(&mut self, top: bool) -> Result<SelectAst, ParseError> {
        let mut blocks = vec![self.block(top)?];
        let mut ops = Vec::new();
        while self.at_keyword("UNION") {
            let start = self.peek().unwrap().span.start;
            self.pos += 1;
            let kind = if self.eat_keyword("ALL") { SetOpKind::UnionAll } else { SetOpKind::Union };
            if top {
                self.map.set_ops.push(Span::new(start, self.last_end()));
            }
            ops.push(kind);
            blocks.push(self.block(false)?);
        }
        let mut order_by = Vec::new();
        if self.at_keyword("ORDER") {
            let start = self.peek().unwrap().span.start;
            self.pos += 1;
            self.expect_keyword("BY", "after ORDER")?;
            order_by = self.comma_list(|p| {
                let expr = p.expr()?;
                let direction = if p.eat_keyword("DESC") {
                    SortDirection::Descending
                } else {
                    p.eat_keyword("ASC");
                    SortDirection::Ascending
                };
                Ok(OrderItem { expr, direction })
            })?;
            if top {
                self.map.clauses.insert(Clause::OrderBy, Span::new(start, self.last_end()));
            }
        }
        // Rebuild the right-linked chain.
        let mut tail: Option<SelectAst> = None;
        while let Some(mut b) = blocks.pop() {
            if let Some(t) = tail.take() {
                let kind = ops.pop().expect("one operator per extra block");
                b.set_op = Some(Box::new(SetOperation { kind, right: t }));
            }
            tail = Some(b);
        }
        let mut head = tail.expect("at least one block");
        head.order_by = order_by;
        Ok(head)
    }

    fn block(&mut self, record: bool) -> Result<SelectAst, ParseError> {
        let record = record && self.map.clauses.is_empty();
        let select_start = match self.peek() {
            Some(t) if t.is_keyword("SELECT") => {
                self.pos += 1;
                t.span.start
            }
            Some(t) => {
                return Err(self
                    .unexpected(t, "A query has to start with the word SELECT.", &["SELECT"])
                    .with_hint("start the query with SELECT followed by the columns you want"));
            }
            None => {
                return Err(self.unexpected_end("The query stops where a SELECT was expected.", &["SELECT"]));
            }
        };
        let distinct = self.eat_keyword("DISTINCT");
        if self.at_keyword("FROM") || self.peek().is_none() || self.at_symbol(";") {
            let span = self.peek().map_or(self.end_span(), |t| t.span);
            return Err(ParseError::new(
                ParseErrorKind::EmptySelectList,
                span,
                self.peek().map_or("the end of the query".into(), describe_plain),
                "The list of columns after SELECT is empty.",
            )
            .expecting(&["a column name", "*"])
            .with_hint("name at least one column, or write * for all columns"));
        }
        let select_list = self.comma_list(Self::select_item)?;
        if record {
            self.map.clauses.insert(Clause::Select, Span::new(select_start, self.last_end()));
        }

        let from_start = match self.peek() {
            Some(t) if t.is_keyword("FROM") => {
                self.pos += 1;
                t.span.start
            }
            Some(t) => return Err(self.missing_from(t)),
            None => {
                return Err(ParseError::new(
                    ParseErrorKind::MissingFrom,
                    self.end_span(),
                    "the end of the query".into(),
                    "The query does not say which table to read from.",
                )
                .expecting(&["FROM"])
                .with_hint("add FROM before the table name"));
            }
        };
        let from = self.comma_list(Self::table_ref)?;
        if record {
            self.map.clauses.insert(Clause::From, Span::new(from_start, self.last_end()));
        }

        let mut where_clause = None;
        if let Some(t) = self.peek().filter(|t| t.is_keyword("WHERE")) {
            self.pos += 1;
            where_clause = Some(self.expr()?);
            if record {
                self.map.clauses.insert(Clause::Where, Span::new(t.span.start, self.last_end()));
            }
        }
        let mut group_by = Vec::new();
        if let Some(t) = self.peek().filter(|t| t.is_keyword("GROUP")) {
            self.pos += 1;
            self.expect_keyword("BY", "after GROUP")?;
            group_by = self.comma_list(Self::expr)?;
            if record {
                self.map.clauses.insert(Clause::GroupBy, Span::new(t.span.start, self.last_end()));
            }
        }
        let mut having = None;
        if let Some(t) = self.peek().filter(|t| t.is_keyword("HAVING")) {
            self.pos += 1;
            having = Some(self.expr()?);
            if record {
                self.map.clauses.insert(Clause::Having, Span::new(t.span.start, self.last_end()));
            }
        }
        Ok(SelectAst {
            distinct,
            select_list,
            from,
            where_clause,
            group_by,
            having,
            order_by: Vec::new(),
            set_op: None,
        })
    }

    fn missing_from(&self, t: &Token) -> ParseError {
        if t.is_symbol(";") && self.peek_at(1).is_some() {
            return self.stray_semicolon(t);
        }
        let from_later = self.tokens[self.pos..].iter().any(|x| x.is_keyword("FROM"));
        if from_later && matches!(t.kind, TokenKind::Identifier | TokenKind::QuotedIdentifier | TokenKind::Constant(_)) {
            return ParseError::new(
                ParseErrorKind::MissingComma,
                t.span,
                describe_plain(t),
                "Two columns are listed next to each other without a comma between them.",
            )
            .expecting(&["a comma", "FROM"])
            .with_hint("add a comma between the column names, or write AS before an alias");
        }
        if matches!(t.kind, TokenKind::Identifier | TokenKind::QuotedIdentifier) {
            return ParseError::new(
                ParseErrorKind::MissingFrom,
                t.span,
                describe_plain(t),
                "The query does not say which table to read from; the word FROM is missing.",
            )
            .expecting(&["FROM"])
            .with_hint("add FROM before the table name");
        }
        if t.is_symbol(")") && self.depth == 0 {
            return ParseError::new(
                ParseErrorKind::UnbalancedParenthesis,
                t.span,
                describe_plain(t),
                "There is a closing parenthesis without a matching opening one.",
            )
            .with_hint("remove the extra closing parenthesis");
        }
        ParseError::new(
            ParseErrorKind::MissingFrom,
            t.span,
            describe_plain(t),
            "After the list of columns the query needs the word FROM and a table name.",
        )
        .expecting(&["a comma", "FROM"])
        .with_hint("add FROM before the table name")
    }

    fn comma_list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        let mut out = vec![item(self)?];
        while self.eat_symbol(",") {
            out.push(item(self)?);
        }
        Ok(out)
    }

    fn select_item(&mut self) -> Result<SelectItem, ParseError> {
        if self.eat_symbol("*") {
            return Ok(SelectItem::Wildcard);
        }
        let expr = self.expr()?;
        let alias = if self.eat_keyword("AS") { Some(self.identifier("after AS")?) } else { None };
        Ok(SelectItem::Expr { expr, alias })
    }

    fn identifier(&mut self, context: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(t) if matches!(t.kind, TokenKind::Identifier | TokenKind::QuotedIdentifier) => {
                self.pos += 1;
                Ok(t.text.clone())
            }
            Some(t) if t.kind == TokenKind::Keyword => Err(self
                .unexpected(t, &format!("A name is needed {context}, but {} is a reserved word.", t.text.to_ascii_uppercase()), &["a name"])
                .with_hint("put the name in double quotes to use a reserved word")),
            Some(t) => Err(self.unexpected(t, &format!("A name is needed {context}."), &["a name"]).with_hint(format!("write a table or column name {context}"))),
            None => Err(self
                .unexpected_end(&format!("The query stops where a name is needed {context}."), &["a name"])
                .with_hint(format!("write a table or column name {context}"))),
        }
    }

    fn table_ref(&mut self) -> Result<TableRef, ParseError> {
        let factor = self.table_factor()?;
        let mut joins = Vec::new();
        loop {
            if let Some(t) = self.peek() {
                if let Some(kw) = t.keyword() {
                    if matches!(kw.as_str(), "LEFT" | "RIGHT" | "FULL" | "CROSS" | "OUTER") {
                        return Err(self.unsupported(t, &format!("{kw} JOIN")));
                    }
                }
            }
            if self.eat_keyword("INNER") {
                self.expect_keyword("JOIN", "after INNER")?;
            } else if !self.eat_keyword("JOIN") {
                break;
            }
            let right = self.table_factor()?;
            self.expect_keyword("ON", "after the joined table to give the join condition")?;
            let on = self.expr()?;
            joins.push(Join { factor: right, on });
        }
        Ok(TableRef { factor, joins })
    }

    fn table_factor(&mut self) -> Result<TableFactor, ParseError> {
        if let Some(open) = self.peek().filter(|t| t.is_symbol("(")) {
            self.pos += 1;
            self.depth += 1;
            let q = self.query(false)?;
            self.close_paren(open)?;
            self.depth -= 1;
            self.eat_keyword("AS");
            let alias = self.identifier("to name the subquery in FROM")?;
            return Ok(TableFactor::Derived { subquery: Box::new(q), alias });
        }
        let first = self.identifier("after FROM or JOIN for the table")?;
        let name = if self.eat_symbol(".") {
            let second = self.identifier("after the dot")?;
            TableName { schema: Some(first), name: second }
        } else {
            TableName { schema: None, name: first }
        };
        let alias = if self.eat_keyword("AS") {
            Some(self.identifier("after AS")?)
        } else if self.peek().is_some_and(|t| matches!(t.kind, TokenKind::Identifier | TokenKind::QuotedIdentifier)) {
            Some(self.identifier("as the table alias")?)
        } else {
            None
        };
        Ok(TableFactor::Table { name, alias })
    }

    fn close_paren(&mut self, open: &Token) -> Result<(), ParseError> {
        if self.eat_symbol(")") {
            return Ok(());
        }
        let span = open.span;
        let (found, message) = match self.peek() {
            Some(t) if t.is_symbol(",") => (describe_plain(t), "A comma appears where the parenthesis should close."),
            Some(t) => (describe_plain(t), "An opening parenthesis is never closed."),
            None => ("the end of the query".to_string(), "An opening parenthesis is never closed."),
        };
        Err(ParseError::new(ParseErrorKind::UnbalancedParenthesis, span, found, message)
            .expecting(&["a closing parenthesis"])
            .with_hint("add a closing parenthesis to match the opening one"))
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.eat_keyword("OR") {
            let rhs = self.and_expr()?;
            lhs = Expr::binary(BinaryOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while self.eat_keyword("AND") {
            let rhs = self.not_expr()?;
            lhs = Expr::binary(BinaryOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_keyword("NOT") {
            let operand = self.not_expr()?;
            return Ok(Expr::Unary { op: UnaryOp::Not, operand: Box::new(operand) });
        }
        self.is_expr()
    }

    fn is_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.comparison()?;
        while self.eat_keyword("IS") {
            let negated = self.eat_keyword("NOT");
            match self.peek() {
                Some(t) if t.is_keyword("NULL") => self.pos += 1,
                Some(t) => {
                    return Err(self
                        .unexpected(t, "Only IS NULL and IS NOT NULL are supported.", &["NULL"])
                        .with_hint("use = to compare with a value, or write IS NULL to test for a missing value"))
                }
                None => return Err(self.unexpected_end("The query stops after IS.", &["NULL"]).with_hint("finish with IS NULL or IS NOT NULL")),
            }
            e = Expr::IsNull { operand: Box::new(e), negated };
        }
        Ok(e)
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        if let Some(t) = self.peek() {
            if let Some(kw) = t.keyword() {
                if matches!(kw.as_str(), "IN" | "LIKE" | "BETWEEN") {
                    return Err(self.unsupported(t, &kw));
                }
            }
            if t.kind == TokenKind::SpecialCharacter {
                if let Some(op) = BinaryOp::from_symbol(&t.text).filter(|op| op.precedence() == Precedence::Comparison) {
                    self.pos += 1;
                    let rhs = self.additive()?;
                    return Ok(Expr::binary(op, lhs, rhs));
                }
            }
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        while let Some(op) = self.peek_binary(Precedence::Additive) {
            self.pos += 1;
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binary(Precedence::Multiplicative) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn peek_binary(&self, level: Precedence) -> Option<BinaryOp> {
        let t = self.peek()?;
        if t.kind != TokenKind::SpecialCharacter {
            return None;
        }
        BinaryOp::from_symbol(&t.text).filter(|op| op.precedence() == level)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_symbol("-") {
            // Fold a minus directly in front of a number into the literal.
            if let Some(t) = self.peek() {
                if let TokenKind::Constant(kind @ (ConstantKind::Integer | ConstantKind::Decimal)) = t.kind {
                    self.pos += 1;
                    return number_literal(t, kind, true);
                }
            }
            let operand = self.unary()?;
            return Ok(Expr::Unary { op: UnaryOp::Neg, operand: Box::new(operand) });
        }
        if self.eat_symbol("~") {
            let operand = self.unary()?;
            return Ok(Expr::Unary { op: UnaryOp::BitNot, operand: Box::new(operand) });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(t) = self.peek() else {
            return Err(self
                .unexpected_end("The query stops where a value or column name should be.", &["a column name", "a value"])
                .with_hint("finish the condition or remove the trailing operator"));
        };
        match t.kind {
            TokenKind::Constant(ConstantKind::String) => {
                self.pos += 1;
                Ok(Expr::Literal { value: Literal::String(t.text.clone()) })
            }
            TokenKind::Constant(kind) => {
                self.pos += 1;
                number_literal(t, kind, false)
            }
            TokenKind::Keyword => {
                let kw = t.text.to_ascii_uppercase();
                match kw.as_str() {
                    "TRUE" | "FALSE" => {
                        self.pos += 1;
                        Ok(Expr::Literal { value: Literal::Boolean(kw == "TRUE") })
                    }
                    "NULL" => {
                        self.pos += 1;
                        Ok(Expr::Literal { value: Literal::Null })
                    }
                    "CASE" | "EXISTS" => Err(self.unsupported(t, &kw)),
                    "FROM" => Err(self
                        .unexpected(t, "A column name or value is missing before FROM.", &["a column name"])
                        .with_hint("remove the trailing comma or add the missing column")),
                    _ => Err(self
                        .unexpected(
                            t,
                            &format!("The word {kw} cannot be used here; a column name or value was expected."),
                            &["a column name", "a value"],
                        )
                        .with_hint("check that the clauses are in the right order and that no column is missing")),
                }
            }
            TokenKind::Identifier | TokenKind::QuotedIdentifier => {
                self.pos += 1;
                if self.at_symbol("(") {
                    return self.function_call(t);
                }
                if self.eat_symbol(".") {
                    if let Some(star) = self.peek().filter(|x| x.is_symbol("*")) {
                        return Err(self.unsupported(star, "Selecting table.* "));
                    }
                    let name = self.identifier("after the dot")?;
                    return Ok(Expr::Column(ColumnRef { qualifier: Some(t.text.clone()), name }));
                }
                Ok(Expr::Column(ColumnRef { qualifier: None, name: t.text.clone() }))
            }
            TokenKind::SpecialCharacter if t.text == "(" => {
                self.pos += 1;
                self.depth += 1;
                if self.at_keyword("SELECT") {
                    let q = self.query(false)?;
                    self.close_paren(t)?;
                    self.depth -= 1;
                    return Ok(Expr::Subquery { query: Box::new(q) });
                }
                let first = self.expr()?;
                if self.at_symbol(",") {
                    let mut items = vec![first];
                    while self.eat_symbol(",") {
                        items.push(self.expr()?);
                    }
                    self.close_paren(t)?;
                    self.depth -= 1;
                    return Ok(Expr::Row { items });
                }
                self.close_paren(t)?;
                self.depth -= 1;
                Ok(first)
            }
            TokenKind::SpecialCharacter if t.text == ";" && self.peek_at(1).is_some() => Err(self.stray_semicolon(t)),
            TokenKind::SpecialCharacter if t.text == "," => Err(self
                .unexpected(t, "There are two commas in a row, or a comma with nothing before it.", &["a column name"])
                .with_hint("remove the extra comma")),
            TokenKind::SpecialCharacter => Err(self
                .unexpected(t, "A value or column name is missing here.", &["a column name", "a value"])
                .with_hint("add the missing value before this symbol")),
        }
    }

    fn function_call(&mut self, name_tok: &Token) -> Result<Expr, ParseError> {
        let open = self.bump();
        self.depth += 1;
        let name = if is_aggregate_name(&name_tok.text) {
            name_tok.text.to_ascii_uppercase()
        } else {
            name_tok.text.clone()
        };
        if let Some(d) = self.peek().filter(|x| x.is_keyword("DISTINCT")) {
            return Err(self.unsupported(d, "DISTINCT inside a function call"));
        }
        let args = if self.at_symbol("*") {
            let star = self.bump();
            if name != "COUNT" {
                return Err(self
                    .unexpected(star, "Only COUNT accepts an asterisk as its argument.", &["a column name"])
                    .with_hint(format!("give {name} a column name instead of the asterisk")));
            }
            FunctionArgs::Star
        } else if self.at_symbol(")") {
            FunctionArgs::List(Vec::new())
        } else {
            FunctionArgs::List(self.comma_list(Self::expr)?)
        };
        self.close_paren(open)?;
        self.depth -= 1;
        Ok(Expr::Function { name, args })
    }
}

fn number_literal(t: &Token, kind: ConstantKind, negative: bool) -> Result<Expr, ParseError> {
    let text = if negative { format!("-{}", t.text) } else { t.text.clone() };
    let value = match kind {
        ConstantKind::Integer => match text.parse::<i64>() {
            Ok(v) => Literal::Integer(v),
            Err(_) => {
                return Err(ParseError::new(
                    ParseErrorKind::NumberOutOfRange,
                    t.span,
                    describe_plain(t),
                    "This whole number is too large to store.",
                )
                .with_hint("use a smaller number, or write it with a decimal point"))
            }
        },
        _ => Literal::Decimal(normalize_decimal(&text)),
    };
    Ok(Expr::Literal { value })
}

/// `.5` becomes `0.5` and `3.` becomes `3.0` so decimals render unambiguously.
fn normalize_decimal(text: &str) -> String {
    let (sign, body) = text.strip_prefix('-').map_or(("", text), |b| ("-", b));
    let body = if body.starts_with('.') { format!("0{body}") } else { body.to_string() };
    let body = if body.ends_with('.') { format!("{body}0") } else { body };
    format!("{sign}{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn customers_query() {
        let ast = parse_select(
            "SELECT SSN, address FROM Customers WHERE credit_score (SSN) >600 AND education='College'",
        )
        .unwrap();
        assert_eq!(ast.select_list, vec![SelectItem::column("SSN"), SelectItem::column("address")]);
        assert_eq!(ast.from, vec![TableRef::table("Customers")]);
        let expected = Expr::and(
            Expr::binary(BinaryOp::Gt, Expr::call("credit_score", vec![Expr::column("SSN")]), Expr::int(600)),
            Expr::binary(BinaryOp::Eq, Expr::column("education"), Expr::string("College")),
        );
        assert_eq!(ast.where_clause, Some(expected));
    }

    #[test]
    fn star_select() {
        let ast = parse_select("SELECT * FROM t;").unwrap();
        assert_eq!(ast.select_list, vec![SelectItem::Wildcard]);
        assert_eq!(ast.from, vec![TableRef::table("t")]);
    }

    #[test]
    fn fused_row_subquery() {
        let ast = parse_select(
            "SELECT col1 FROM tablename1 WHERE (col2, col3) = (SELECT MAX (col2), MAX (col3) FROM tablename2) AND col4 = testvalue1",
        )
        .unwrap();
        let w = ast.where_clause.unwrap();
        let conj = w.conjuncts();
        assert_eq!(conj.len(), 2);
        match conj[0] {
            Expr::Binary { op: BinaryOp::Eq, lhs, rhs } => {
                assert_eq!(**lhs, Expr::Row { items: vec![Expr::column("col2"), Expr::column("col3")] });
                let Expr::Subquery { query } = &**rhs else { panic!("not a subquery") };
                assert_eq!(query.select_list.len(), 2);
                assert_eq!(query.select_list[0], SelectItem::expr(Expr::call("MAX", vec![Expr::column("col2")])));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("a + b * c = d OR NOT e AND f").unwrap();
        let expected = Expr::binary(
            BinaryOp::Or,
            Expr::binary(
                BinaryOp::Eq,
                Expr::binary(BinaryOp::Add, Expr::column("a"), Expr::binary(BinaryOp::Mul, Expr::column("b"), Expr::column("c"))),
                Expr::column("d"),
            ),
            Expr::and(Expr::Unary { op: UnaryOp::Not, operand: Box::new(Expr::column("e")) }, Expr::column("f")),
        );
        assert_eq!(e, expected);
        let e = parse_expression("a - b - c").unwrap();
        assert_eq!(
            e,
            Expr::binary(BinaryOp::Sub, Expr::binary(BinaryOp::Sub, Expr::column("a"), Expr::column("b")), Expr::column("c"))
        );
    }

    #[test]
    fn bitwise_sits_with_arithmetic() {
        let e = parse_expression("a | b & c").unwrap();
        assert_eq!(
            e,
            Expr::binary(BinaryOp::BitOr, Expr::column("a"), Expr::binary(BinaryOp::BitAnd, Expr::column("b"), Expr::column("c")))
        );
    }

    #[test]
    fn negative_numbers_fold() {
        assert_eq!(parse_expression("-5").unwrap(), Expr::int(-5));
        assert_eq!(parse_expression("-.5").unwrap(), Expr::Literal { value: Literal::Decimal("-0.5".into()) });
    }

    #[test]
    fn union_chain_and_order_by() {
        let ast = parse_select("SELECT a FROM t1 UNION SELECT a FROM t2 UNION ALL SELECT a FROM t3 ORDER BY a DESC").unwrap();
        let b = ast.branches();
        assert_eq!(b.len(), 3);
        assert_eq!(b[1].0, Some(SetOpKind::Union));
        assert_eq!(b[2].0, Some(SetOpKind::UnionAll));
        assert_eq!(ast.order_by.len(), 1);
        assert!(b[2].1.order_by.is_empty());
    }

    #[test]
    fn joins_and_aliases() {
        let ast = parse_select("SELECT c.name FROM s.customers c INNER JOIN orders AS o ON c.id = o.cid").unwrap();
        let tr = &ast.from[0];
        assert_eq!(tr.factor.binding_name(), "c");
        assert_eq!(tr.joins.len(), 1);
        assert_eq!(tr.joins[0].factor.binding_name(), "o");
    }

    #[test]
    fn aggregate_names_are_upper_cased() {
        let a = parse_select("select count(*), max(x) from t").unwrap();
        let b = parse_select("SELECT COUNT(*), MAX(x) FROM t").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_from() {
        let e = parse_select("SELECT name customers").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingFrom);
        assert_eq!(e.hint.as_deref(), Some("add FROM before the table name"));
    }

    #[test]
    fn missing_comma() {
        let e = parse_select("SELECT name age FROM t").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingComma);
    }

    #[test]
    fn stray_semicolon() {
        for q in ["SELECT a; FROM t", "SELECT a FROM t; WHERE a = 1", "SELECT a FROM t;;"] {
            let e = parse_select(q).unwrap_err();
            assert_eq!(e.kind, ParseErrorKind::StraySemicolon, "{q}");
        }
    }

    #[test]
    fn unbalanced_paren_points_at_opening() {
        let e = parse_select("SELECT a FROM t WHERE (a = 1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnbalancedParenthesis);
        assert_eq!(e.span, Span::new(22, 23));
    }

    #[test]
    fn source_map_records_clauses() {
        let text = "SELECT a FROM t WHERE a > 1 ORDER BY a";
        let (_, map) = parse_select_with_map(text).unwrap();
        assert_eq!(&text[map.clauses[&Clause::Where].start..map.clauses[&Clause::Where].end], "WHERE a > 1");
        assert_eq!(&text[map.clauses[&Clause::OrderBy].start..map.clauses[&Clause::OrderBy].end], "ORDER BY a");
    }
}
