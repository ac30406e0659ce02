//! Reader and writer for the `.nal` text format.

use std::fmt::Write as _;

use super::{
    CatalogEntry, CatalogError, Collection, Degeneration, ExtensionCase, Item, Nondegeneration, ObstructionClaim, OrbitTable,
    Product, Relation, Symmetry,
};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> CatalogError {
        self.err_at(self.pos, msg)
    }

    fn err_at(&self, pos: usize, msg: impl Into<String>) -> CatalogError {
        let before = &self.src[..pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(pos, |p| pos - p - 1) + 1;
        CatalogError::Syntax { line, col, msg: msg.into() }
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    /// Whitespace, newlines and comments.
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                self.skip_comment();
            } else {
                break;
            }
        }
    }

    /// Whitespace plus `;` separators.
    fn skip_sep(&mut self) {
        loop {
            self.skip_ws();
            if self.peek() == Some(';') {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), CatalogError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(match self.peek() {
                Some(f) => format!("expected '{}', found '{}'", c, f),
                None => format!("expected '{}', found end of input", c),
            }))
        }
    }

    fn ident(&mut self) -> Result<String, CatalogError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '+' || c == '-' {
                self.bump();
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.err("expected a name"));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn keyword(&mut self) -> Result<(usize, String), CatalogError> {
        self.skip_ws();
        let at = self.pos;
        Ok((at, self.ident()?))
    }

    fn string(&mut self) -> Result<String, CatalogError> {
        self.skip_ws();
        if self.peek() != Some('"') {
            return Err(self.err("expected a quoted name"));
        }
        self.bump();
        let start = self.pos;
        loop {
            match self.bump() {
                Some('"') => return Ok(self.src[start..self.pos - 1].to_string()),
                Some('\n') | None => return Err(self.err_at(start - 1, "unterminated string")),
                _ => {}
            }
        }
    }

    fn int(&mut self) -> Result<usize, CatalogError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        self.src[start..self.pos].parse().map_err(|_| self.err_at(start, "expected an integer"))
    }

    /// Raw scalar or vector text, up to a terminator at paren depth 0.
    fn raw(&mut self, in_list: bool) -> Result<String, CatalogError> {
        self.skip_ws();
        let start = self.pos;
        let mut depth = 0i32;
        while let Some(c) = self.peek() {
            match c {
                '(' => depth += 1,
                ')' if depth > 0 => depth -= 1,
                ')' => return Err(self.err("unbalanced ')'")),
                ';' | '}' | '\n' | '#' if depth == 0 => break,
                ',' | ']' if depth == 0 && in_list => break,
                '\n' => return Err(self.err("newline inside parentheses")),
                _ => {}
            }
            self.bump();
        }
        if depth != 0 {
            return Err(self.err("unbalanced '('"));
        }
        let text = self.src[start..self.pos].trim();
        if text.is_empty() {
            return Err(self.err_at(start, "expected an expression"));
        }
        Ok(text.to_string())
    }

    fn colon(&mut self) -> Result<(), CatalogError> {
        self.expect(':')
    }

    fn name_list(&mut self) -> Result<Vec<String>, CatalogError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn raw_list(&mut self) -> Result<Vec<String>, CatalogError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(self.raw(true)?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    /// `{ k = expr ; ... }`
    fn map(&mut self) -> Result<Vec<(String, String)>, CatalogError> {
        self.expect('{')?;
        let mut out: Vec<(String, String)> = Vec::new();
        loop {
            self.skip_sep();
            if self.eat('}') {
                return Ok(out);
            }
            let (at, k) = self.keyword()?;
            if out.iter().any(|(x, _)| *x == k) {
                return Err(self.err_at(at, format!("'{}' bound twice", k)));
            }
            self.expect('=')?;
            out.push((k, self.raw(false)?));
        }
    }

    /// `{ E1 = vec ; E2 = vec ; ... }` with labels in order.
    fn basis(&mut self) -> Result<Vec<String>, CatalogError> {
        self.expect('{')?;
        let mut out = Vec::new();
        loop {
            self.skip_sep();
            if self.eat('}') {
                return Ok(out);
            }
            let (at, label) = self.keyword()?;
            if label != format!("E{}", out.len() + 1) {
                return Err(self.err_at(at, format!("expected E{}, found {}", out.len() + 1, label)));
            }
            self.expect('=')?;
            out.push(self.raw(false)?);
        }
    }

    /// `{ (i,j) = vec ; ... }`
    fn products(&mut self) -> Result<Vec<(usize, Product)>, CatalogError> {
        self.expect('{')?;
        let mut out = Vec::new();
        loop {
            self.skip_sep();
            if self.eat('}') {
                return Ok(out);
            }
            self.skip_ws();
            let at = self.pos;
            self.expect('(')?;
            let i = self.int()?;
            self.expect(',')?;
            let j = self.int()?;
            self.expect(')')?;
            self.expect('=')?;
            out.push((at, Product { i, j, value: self.raw(false)? }));
        }
    }

    fn triples(&mut self) -> Result<Vec<(usize, usize, usize)>, CatalogError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            self.expect('(')?;
            let p = self.int()?;
            self.expect(',')?;
            let q = self.int()?;
            self.expect(',')?;
            let r = self.int()?;
            self.expect(')')?;
            out.push((p, q, r));
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn bool(&mut self) -> Result<bool, CatalogError> {
        let (at, w) = self.keyword()?;
        match w.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.err_at(at, "expected true or false")),
        }
    }
}

fn check_products(c: &Cursor, dim: usize, symmetry: Symmetry, rows: &[(usize, Product)]) -> Result<(), CatalogError> {
    for (idx, (at, p)) in rows.iter().enumerate() {
        if p.i == 0 || p.j == 0 || p.i > dim || p.j > dim {
            return Err(c.err_at(*at, format!("product ({},{}) outside dimension {}", p.i, p.j, dim)));
        }
        for (_, q) in &rows[..idx] {
            let same = q.i == p.i && q.j == p.j;
            let mirrored = symmetry != Symmetry::None && q.i == p.j && q.j == p.i;
            if same || mirrored {
                return Err(c.err_at(*at, format!("duplicate product ({},{})", p.i, p.j)));
            }
        }
    }
    Ok(())
}

fn algebra(c: &mut Cursor, name: String) -> Result<CatalogEntry, CatalogError> {
    let mut e = CatalogEntry::new(&name, 0);
    let mut dim = None;
    let mut rows = Vec::new();
    c.expect('{')?;
    loop {
        c.skip_sep();
        if c.eat('}') {
            break;
        }
        let (at, key) = c.keyword()?;
        match key.as_str() {
            "dim" => {
                c.colon()?;
                dim = Some(c.int()?);
            }
            "symmetry" => {
                c.colon()?;
                let (at, s) = c.keyword()?;
                e.symmetry = s.parse().map_err(|_| c.err_at(at, format!("unknown symmetry '{}'", s)))?;
            }
            "params" => {
                c.colon()?;
                e.params = c.name_list()?;
            }
            "constraints" => {
                c.colon()?;
                e.constraints = c.raw_list()?;
            }
            "claims" => {
                c.colon()?;
                e.claims = c.name_list()?;
            }
            "group" => {
                c.colon()?;
                e.group = Some(c.ident()?);
            }
            "rescaled" => {
                c.colon()?;
                e.rescaled = c.bool()?;
            }
            "table" => rows = c.products()?,
            "relation" => {
                let target = c.string()?;
                c.expect('{')?;
                let mut r = Relation { target, at: Vec::new(), witness: None };
                loop {
                    c.skip_sep();
                    if c.eat('}') {
                        break;
                    }
                    let (at, k) = c.keyword()?;
                    match k.as_str() {
                        "at" => {
                            c.colon()?;
                            r.at = c.map()?;
                        }
                        "basis" => r.witness = Some(c.basis()?),
                        _ => return Err(c.err_at(at, format!("unknown relation field '{}'", k))),
                    }
                }
                e.relations.push(r);
            }
            "aut" => e.aut_shapes.push(c.basis()?),
            _ => return Err(c.err_at(at, format!("unknown algebra field '{}'", key))),
        }
    }
    e.dim = dim.ok_or_else(|| c.err(format!("algebra '{}' has no dim", name)))?;
    check_products(c, e.dim, e.symmetry, &rows)?;
    e.table = rows.into_iter().map(|(_, p)| p).collect();
    Ok(e)
}

fn degeneration(c: &mut Cursor, label: String) -> Result<Degeneration, CatalogError> {
    let mut d = Degeneration { label, from: String::new(), to: String::new(), index: Vec::new(), basis: Vec::new() };
    c.expect('{')?;
    loop {
        c.skip_sep();
        if c.eat('}') {
            break;
        }
        let (at, key) = c.keyword()?;
        match key.as_str() {
            "from" => {
                c.colon()?;
                d.from = c.string()?;
            }
            "to" => {
                c.colon()?;
                d.to = c.string()?;
            }
            "index" => {
                c.colon()?;
                d.index = c.map()?;
            }
            "basis" => d.basis = c.basis()?,
            _ => return Err(c.err_at(at, format!("unknown degeneration field '{}'", key))),
        }
    }
    Ok(d)
}

fn nondegeneration(c: &mut Cursor, label: String) -> Result<Nondegeneration, CatalogError> {
    let mut d = Nondegeneration { label, from: String::new(), to: String::new(), conditions: Vec::new(), basis: Vec::new() };
    c.expect('{')?;
    loop {
        c.skip_sep();
        if c.eat('}') {
            break;
        }
        let (at, key) = c.keyword()?;
        match key.as_str() {
            "from" => {
                c.colon()?;
                d.from = c.string()?;
            }
            "to" => {
                c.colon()?;
                d.to = c.string()?;
            }
            "conditions" => {
                c.colon()?;
                d.conditions = c.triples()?;
            }
            "basis" => d.basis = c.basis()?,
            _ => return Err(c.err_at(at, format!("unknown nondegeneration field '{}'", key))),
        }
    }
    Ok(d)
}

fn obstruction(c: &mut Cursor, label: String) -> Result<ObstructionClaim, CatalogError> {
    let mut o = ObstructionClaim { label, from: String::new(), to: String::new(), kind: String::new() };
    c.expect('{')?;
    loop {
        c.skip_sep();
        if c.eat('}') {
            break;
        }
        let (at, key) = c.keyword()?;
        c.colon()?;
        match key.as_str() {
            "from" => o.from = c.string()?,
            "to" => o.to = c.string()?,
            "kind" => o.kind = c.ident()?,
            _ => return Err(c.err_at(at, format!("unknown obstruction field '{}'", key))),
        }
    }
    Ok(o)
}

fn orbits(c: &mut Cursor, label: String) -> Result<OrbitTable, CatalogError> {
    let mut o = OrbitTable { label, dims: Vec::new() };
    c.expect('{')?;
    loop {
        c.skip_sep();
        if c.eat('}') {
            return Ok(o);
        }
        let name = c.string()?;
        c.expect('=')?;
        o.dims.push((name, c.int()?));
    }
}

fn case(c: &mut Cursor, label: String) -> Result<ExtensionCase, CatalogError> {
    let mut x = ExtensionCase {
        label,
        plus: String::new(),
        plus_at: Vec::new(),
        frame: None,
        theta: Vec::new(),
        result: String::new(),
        result_at: Vec::new(),
        witness: None,
    };
    c.expect('{')?;
    loop {
        c.skip_sep();
        if c.eat('}') {
            break;
        }
        let (at, key) = c.keyword()?;
        match key.as_str() {
            "plus" => {
                c.colon()?;
                x.plus = c.string()?;
            }
            "plus_at" => {
                c.colon()?;
                x.plus_at = c.map()?;
            }
            "result" => {
                c.colon()?;
                x.result = c.string()?;
            }
            "result_at" => {
                c.colon()?;
                x.result_at = c.map()?;
            }
            "frame" => x.frame = Some(c.basis()?),
            "witness" => x.witness = Some(c.basis()?),
            "theta" => {
                let rows = c.products()?;
                for (idx, (at, p)) in rows.iter().enumerate() {
                    if p.i >= p.j {
                        return Err(c.err_at(*at, "theta rows need i < j (the form is skew)"));
                    }
                    if rows[..idx].iter().any(|(_, q)| q.i == p.i && q.j == p.j) {
                        return Err(c.err_at(*at, format!("duplicate product ({},{})", p.i, p.j)));
                    }
                }
                x.theta = rows.into_iter().map(|(_, p)| p).collect();
            }
            _ => return Err(c.err_at(at, format!("unknown case field '{}'", key))),
        }
    }
    Ok(x)
}

fn collection(c: &mut Cursor, label: String) -> Result<Collection, CatalogError> {
    let mut o = Collection { label, members: Vec::new() };
    c.expect('{')?;
    loop {
        c.skip_sep();
        if c.eat('}') {
            return Ok(o);
        }
        let name = c.string()?;
        c.skip_ws();
        let at = if c.peek() == Some('{') { c.map()? } else { Vec::new() };
        o.members.push((name, at));
    }
}

/// Every item of a document, in file order.
pub fn parse_document(text: &str) -> Result<Vec<Item>, CatalogError> {
    let mut c = Cursor { src: text, pos: 0 };
    let mut out = Vec::new();
    loop {
        c.skip_sep();
        if c.peek().is_none() {
            return Ok(out);
        }
        let (at, kind) = c.keyword()?;
        let item = match kind.as_str() {
            "basis" => Item::Basis(c.basis()?),
            _ => {
                let label = c.string()?;
                match kind.as_str() {
                    "algebra" => Item::Algebra(algebra(&mut c, label)?),
                    "degeneration" => Item::Degeneration(degeneration(&mut c, label)?),
                    "nondegeneration" => Item::Nondegeneration(nondegeneration(&mut c, label)?),
                    "obstruction" => Item::Obstruction(obstruction(&mut c, label)?),
                    "orbits" => Item::Orbits(orbits(&mut c, label)?),
                    "case" => Item::Case(case(&mut c, label)?),
                    "collection" => Item::Collection(collection(&mut c, label)?),
                    _ => return Err(c.err_at(at, format!("unknown item '{}'", kind))),
                }
            }
        };
        out.push(item);
    }
}

fn write_map(out: &mut String, m: &[(String, String)]) {
    if m.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{ ");
    let parts: Vec<String> = m.iter().map(|(k, v)| format!("{} = {}", k, v)).collect();
    out.push_str(&parts.join(" ; "));
    out.push_str(" }");
}

fn write_basis(out: &mut String, indent: &str, key: &str, b: &[String]) {
    let parts: Vec<String> = b.iter().enumerate().map(|(i, v)| format!("E{} = {}", i + 1, v)).collect();
    let _ = writeln!(out, "{}{} {{ {} }}", indent, key, parts.join(" ; "));
}

fn write_products(out: &mut String, indent: &str, key: &str, rows: &[Product]) {
    if rows.is_empty() {
        let _ = writeln!(out, "{}{} {{}}", indent, key);
        return;
    }
    let _ = writeln!(out, "{}{} {{", indent, key);
    for p in rows {
        let _ = writeln!(out, "{}  ({},{}) = {}", indent, p.i, p.j, p.value);
    }
    let _ = writeln!(out, "{}}}", indent);
}

pub fn render_entry(e: &CatalogEntry) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "algebra \"{}\" {{", e.name);
    let _ = writeln!(out, "  dim: {}", e.dim);
    let _ = writeln!(out, "  symmetry: {}", e.symmetry);
    let _ = writeln!(out, "  params: [{}]", e.params.join(", "));
    let _ = writeln!(out, "  constraints: [{}]", e.constraints.join(", "));
    if !e.claims.is_empty() {
        let _ = writeln!(out, "  claims: [{}]", e.claims.join(", "));
    }
    if let Some(g) = &e.group {
        let _ = writeln!(out, "  group: {}", g);
    }
    if e.rescaled {
        let _ = writeln!(out, "  rescaled: true");
    }
    write_products(&mut out, "  ", "table", &e.table);
    for r in &e.relations {
        let _ = write!(out, "  relation \"{}\" {{ at: ", r.target);
        write_map(&mut out, &r.at);
        match &r.witness {
            Some(w) => {
                out.push('\n');
                write_basis(&mut out, "    ", "basis", w);
                out.push_str("  }\n");
            }
            None => out.push_str(" }\n"),
        }
    }
    for a in &e.aut_shapes {
        write_basis(&mut out, "  ", "aut", a);
    }
    out.push_str("}\n");
    out
}

pub fn render_item(item: &Item) -> String {
    let mut out = String::new();
    match item {
        Item::Algebra(e) => return render_entry(e),
        Item::Degeneration(d) => {
            let _ = write!(out, "degeneration \"{}\" {{\n  from: \"{}\" ; to: \"{}\" ; index: ", d.label, d.from, d.to);
            write_map(&mut out, &d.index);
            out.push('\n');
            write_basis(&mut out, "  ", "basis", &d.basis);
            out.push_str("}\n");
        }
        Item::Nondegeneration(d) => {
            let conds: Vec<String> = d.conditions.iter().map(|(p, q, r)| format!("({},{},{})", p, q, r)).collect();
            let _ = writeln!(
                out,
                "nondegeneration \"{}\" {{\n  from: \"{}\" ; to: \"{}\" ; conditions: [{}]",
                d.label,
                d.from,
                d.to,
                conds.join(", ")
            );
            write_basis(&mut out, "  ", "basis", &d.basis);
            out.push_str("}\n");
        }
        Item::Obstruction(o) => {
            let _ = writeln!(out, "obstruction \"{}\" {{ from: \"{}\" ; to: \"{}\" ; kind: {} }}", o.label, o.from, o.to, o.kind);
        }
        Item::Orbits(o) => {
            let parts: Vec<String> = o.dims.iter().map(|(n, d)| format!("\"{}\" = {}", n, d)).collect();
            let _ = writeln!(out, "orbits \"{}\" {{ {} }}", o.label, parts.join(" ; "));
        }
        Item::Case(x) => {
            let _ = write!(out, "case \"{}\" {{\n  plus: \"{}\" ; plus_at: ", x.label, x.plus);
            write_map(&mut out, &x.plus_at);
            out.push('\n');
            if let Some(f) = &x.frame {
                write_basis(&mut out, "  ", "frame", f);
            }
            write_products(&mut out, "  ", "theta", &x.theta);
            let _ = write!(out, "  result: \"{}\" ; result_at: ", x.result);
            write_map(&mut out, &x.result_at);
            out.push('\n');
            if let Some(w) = &x.witness {
                write_basis(&mut out, "  ", "witness", w);
            }
            out.push_str("}\n");
        }
        Item::Collection(c) => {
            let _ = writeln!(out, "collection \"{}\" {{", c.label);
            for (n, at) in &c.members {
                let _ = write!(out, "  \"{}\"", n);
                if !at.is_empty() {
                    out.push(' ');
                    write_map(&mut out, at);
                }
                out.push('\n');
            }
            out.push_str("}\n");
        }
        Item::Basis(b) => write_basis(&mut out, "", "basis", b),
    }
    out
}

pub fn render_document(items: &[Item]) -> String {
    items.iter().map(render_item).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const M04: &str = "algebra \"M04\" {\n  dim: 3\n  symmetry: commutative\n  params: [alpha]\n  constraints: []\n  table { (1,3) = e1 ; (2,3) = alpha*e2 }\n}\n";

    #[test]
    fn reads_the_reference_block() {
        let items = parse_document(M04).unwrap();
        let Item::Algebra(e) = &items[0] else { panic!() };
        assert_eq!(e.params, vec!["alpha"]);
        assert_eq!(e.table.len(), 2);
        assert_eq!(e.table[1].value, "alpha*e2");
    }

    #[test]
    fn degeneration_block() {
        let src = "degeneration \"G1/M02-to-M01\" {\n  from: \"M02\" ; to: \"M01\" ; index: {}\n  basis { E1 = e1 + 1/2*e2 ; E2 = e3 ; E3 = t*e2 }\n}\n";
        let items = parse_document(src).unwrap();
        let Item::Degeneration(d) = &items[0] else { panic!() };
        assert_eq!(d.basis, vec!["e1 + 1/2*e2", "e3", "t*e2"]);
        assert_eq!(parse_document(&render_document(&items)).unwrap(), items);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_document("algebra \"X\" {\n  dim: 3\n  table { (1,3) e1 }\n}").unwrap_err();
        match err {
            CatalogError::Syntax { line, col, .. } => assert_eq!((line, col), (3, 17)),
            e => panic!("{:?}", e),
        }
    }

    #[test]
    fn mirrored_rows_conflict_under_symmetry() {
        let src = "algebra \"X\" { dim: 2 ; symmetry: commutative\n table { (1,2) = e1 ; (2,1) = e2 } }";
        assert!(matches!(parse_document(src), Err(CatalogError::Syntax { .. })));
        let src = "algebra \"X\" { dim: 2 ; symmetry: none\n table { (1,2) = e1 ; (2,1) = e2 } }";
        assert!(parse_document(src).is_ok());
    }

    #[test]
    fn comments_and_newline_separators() {
        let src = "# head\nalgebra \"Z\" {\n  dim: 3 # trailing\n  symmetry: none\n}\n";
        let items = parse_document(src).unwrap();
        let Item::Algebra(e) = &items[0] else { panic!() };
        assert!(e.table.is_empty());
        assert_eq!(e.symmetry, Symmetry::None);
    }

    #[test]
    fn lists_of_expressions() {
        let src = "algebra \"X\" { dim: 3 ; params: [alpha, beta] ; constraints: [alpha, (alpha - 1)*(alpha + 1)] }";
        let items = parse_document(src).unwrap();
        let Item::Algebra(e) = &items[0] else { panic!() };
        assert_eq!(e.constraints, vec!["alpha", "(alpha - 1)*(alpha + 1)"]);
    }
}
