//! Rendering a dispatcher as source text through a user template.
//!
//! A template is a list of fragment definitions. A line holding only a
//! signature such as `{{BRANCH cond then else}}` starts a fragment; its
//! body runs up to the next signature line. Inside a body, `{{name}}`
//! refers to one of the signature's parameters. Text before the first
//! signature is ignored and can serve as a comment.
//!
//! | signature                  | required | parameters                      |
//! |----------------------------|----------|---------------------------------|
//! | `{{BRANCH cond then else}}`| yes      | condition, left and right code  |
//! | `{{FEAT i}}`               | yes      | feature index                   |
//! | `{{VER id}}`               | yes      | version id, rendered at a leaf  |
//! | `{{CMP_LE}}`               | yes      | none; the `<=` operator         |
//! | `{{MAIN body}}`            | no       | the rendered root               |
//!
//! Parameter names are positional and chosen by the template. A condition
//! is rendered as `FEAT CMP_LE threshold`, with the threshold in the same
//! 17-digit form as the dispatcher text. When a multi-line value is
//! substituted, its continuation lines get the indentation of the line
//! holding the placeholder.
//!
//! With [`REFERENCE_TEMPLATE`], the depth-1 dispatcher splitting feature 0
//! at 6 renders as
//!
//! ```text
//! int mv_select(const double *x)
//! {
//!     if (x[0] <= 6) {
//!         return 1;
//!     } else {
//!         return 2;
//!     }
//! }
//! ```

use std::collections::BTreeMap;

use super::{format_threshold, DispatcherSpec, Node};
use crate::model::VersionId;
use crate::{Error, Result};

/// A C-like template that [`RenderedProgram`] can interpret.
pub const REFERENCE_TEMPLATE: &str = "\
Reference dispatcher template: a C function returning a version id.
{{MAIN body}}
int mv_select(const double *x)
{
    {{body}}
}
{{BRANCH cond then else}}
if ({{cond}}) {
    {{then}}
} else {
    {{else}}
}
{{FEAT i}}
x[{{i}}]
{{VER id}}
return {{id}};
{{CMP_LE}}
<=
";

const SIGNATURES: [(&str, usize, bool); 5] = [
    ("BRANCH", 3, true),
    ("FEAT", 1, true),
    ("VER", 1, true),
    ("CMP_LE", 0, true),
    ("MAIN", 1, false),
];

struct Fragment {
    params: Vec<String>,
    body: String,
}

fn signature(line: &str) -> Option<(&str, Vec<&str>)> {
    let inner = line.trim().strip_prefix("{{")?.strip_suffix("}}")?;
    let mut words = inner.split_whitespace();
    let name = words.next()?;
    SIGNATURES
        .iter()
        .any(|s| s.0 == name)
        .then(|| (name, words.collect()))
}

fn parse_template(template: &str) -> Result<BTreeMap<String, Fragment>> {
    let mut fragments: BTreeMap<String, Fragment> = BTreeMap::new();
    let mut current: Option<(String, Fragment)> = None;
    let finish = |cur: Option<(String, Fragment)>, out: &mut BTreeMap<String, Fragment>| {
        if let Some((name, mut frag)) = cur {
            while frag.body.ends_with('\n') {
                frag.body.pop();
            }
            out.insert(name, frag);
        }
    };
    for line in template.lines() {
        if let Some((name, params)) = signature(line) {
            let arity = SIGNATURES.iter().find(|s| s.0 == name).unwrap().1;
            if params.len() != arity {
                return Err(Error::Template(format!(
                    "{{{{{name}}}}} takes {arity} parameters, got {}",
                    params.len()
                )));
            }
            if fragments.contains_key(name) || current.as_ref().is_some_and(|c| c.0 == name) {
                return Err(Error::Template(format!("{{{{{name}}}}} defined twice")));
            }
            finish(current.take(), &mut fragments);
            current = Some((
                name.to_string(),
                Fragment {
                    params: params.into_iter().map(String::from).collect(),
                    body: String::new(),
                },
            ));
        } else if let Some((_, frag)) = current.as_mut() {
            frag.body.push_str(line);
            frag.body.push('\n');
        }
    }
    finish(current, &mut fragments);
    for (name, _, required) in SIGNATURES {
        if required && !fragments.contains_key(name) {
            return Err(Error::Template(format!(
                "missing required placeholder {{{{{name} ...}}}}"
            )));
        }
    }
    // Every reference in a body must be one of its parameters.
    for (name, frag) in &fragments {
        let mut rest = frag.body.as_str();
        while let Some(start) = rest.find("{{") {
            let end = rest[start..]
                .find("}}")
                .ok_or_else(|| Error::Template(format!("unclosed placeholder in {name}")))?;
            let inner = rest[start + 2..start + end].trim();
            if !frag.params.iter().any(|p| p == inner) {
                return Err(Error::Template(format!(
                    "unknown placeholder {{{{{inner}}}}} in {name}"
                )));
            }
            rest = &rest[start + end + 2..];
        }
    }
    Ok(fragments)
}

fn instantiate(frag: &Fragment, args: &[&str]) -> String {
    let mut out = String::new();
    for (n, line) in frag.body.split('\n').enumerate() {
        if n > 0 {
            out.push('\n');
        }
        let indent: String = line.chars().take_while(|c| c.is_whitespace()).collect();
        let mut rest = line;
        while let Some(start) = rest.find("{{") {
            let end = start + rest[start..].find("}}").expect("checked at parse time");
            out.push_str(&rest[..start]);
            let key = rest[start + 2..end].trim();
            let idx = frag.params.iter().position(|p| p == key).expect("checked");
            out.push_str(&args[idx].replace('\n', &format!("\n{indent}")));
            rest = &rest[end + 2..];
        }
        out.push_str(rest);
    }
    out
}

fn render_node(
    spec: &DispatcherSpec,
    fragments: &BTreeMap<String, Fragment>,
    cmp: &str,
    i: usize,
) -> String {
    match spec.nodes()[i] {
        Node::Leaf { version } => instantiate(&fragments["VER"], &[&version.to_string()]),
        Node::Branch {
            feature,
            threshold,
            left,
            right,
        } => {
            let feat = instantiate(&fragments["FEAT"], &[&feature.to_string()]);
            let cond = format!("{feat} {cmp} {}", format_threshold(threshold));
            let then = render_node(spec, fragments, cmp, left);
            let otherwise = render_node(spec, fragments, cmp, right);
            instantiate(&fragments["BRANCH"], &[&cond, &then, &otherwise])
        }
    }
}

/// Renders `spec` as nested conditionals in the template's style.
pub fn render_template(spec: &DispatcherSpec, template: &str) -> Result<String> {
    let fragments = parse_template(template)?;
    let cmp = instantiate(&fragments["CMP_LE"], &[]);
    let body = render_node(spec, &fragments, &cmp, spec.entry());
    let mut out = match fragments.get("MAIN") {
        Some(main) => instantiate(main, &[&body]),
        None => body,
    };
    out.push('\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Stmt {
    If {
        feature: usize,
        threshold: f64,
        then: Box<Stmt>,
        otherwise: Box<Stmt>,
    },
    Return(u32),
}

/// Interpreter for text rendered with [`REFERENCE_TEMPLATE`], used to check
/// that rendering preserves the dispatcher's behavior.
///
/// It understands exactly `if (x[i] <= t) { ... } else { ... }` and
/// `return id;`; anything before the first `if` or `return` is skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedProgram {
    root: Stmt,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Punct(&'static str),
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit() || c == '-' || c == '.' {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c == '<' && chars.get(i + 1) == Some(&'=') {
            out.push(Tok::Punct("<="));
            i += 2;
        } else {
            let p = match c {
                '(' => "(",
                ')' => ")",
                '{' => "{",
                '}' => "}",
                '[' => "[",
                ']' => "]",
                ';' => ";",
                '*' => "*",
                ',' => ",",
                other => return Err(Error::Template(format!("unexpected character {other:?}"))),
            };
            out.push(Tok::Punct(p));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn next(&mut self) -> Result<Tok> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Template("unexpected end of rendered text".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, p: &'static str) -> Result<()> {
        match self.next()? {
            Tok::Punct(q) if q == p => Ok(()),
            Tok::Ident(s) if s == p => Ok(()),
            other => Err(Error::Template(format!("expected {p:?}, found {other:?}"))),
        }
    }

    fn number<T: std::str::FromStr>(&mut self) -> Result<T> {
        match self.next()? {
            Tok::Num(s) => s
                .parse()
                .map_err(|_| Error::Template(format!("bad number {s:?}"))),
            other => Err(Error::Template(format!(
                "expected a number, found {other:?}"
            ))),
        }
    }

    fn block(&mut self) -> Result<Stmt> {
        self.expect("{")?;
        let s = self.stmt()?;
        self.expect("}")?;
        Ok(s)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        match self.next()? {
            Tok::Ident(k) if k == "if" => {
                self.expect("(")?;
                self.expect("x")?;
                self.expect("[")?;
                let feature = self.number()?;
                self.expect("]")?;
                self.expect("<=")?;
                let threshold = self.number()?;
                self.expect(")")?;
                let then = Box::new(self.block()?);
                self.expect("else")?;
                let otherwise = Box::new(self.block()?);
                Ok(Stmt::If {
                    feature,
                    threshold,
                    then,
                    otherwise,
                })
            }
            Tok::Ident(k) if k == "return" => {
                let id = self.number()?;
                self.expect(";")?;
                Ok(Stmt::Return(id))
            }
            other => Err(Error::Template(format!(
                "expected a statement, found {other:?}"
            ))),
        }
    }
}

impl RenderedProgram {
    pub fn parse(text: &str) -> Result<Self> {
        let toks = tokenize(text)?;
        let start = toks
            .iter()
            .position(|t| matches!(t, Tok::Ident(k) if k == "if" || k == "return"))
            .ok_or_else(|| Error::Template("no statement in rendered text".into()))?;
        let mut p = Parser { toks, pos: start };
        Ok(RenderedProgram { root: p.stmt()? })
    }

    /// Selected version and number of conditionals evaluated.
    pub fn eval(&self, x: &[f64]) -> Result<(VersionId, usize)> {
        let mut s = &self.root;
        let mut comparisons = 0;
        loop {
            match s {
                Stmt::Return(id) => return Ok((VersionId(*id), comparisons)),
                Stmt::If {
                    feature,
                    threshold,
                    then,
                    otherwise,
                } => {
                    let v = *x.get(*feature).ok_or(Error::FeatureArity {
                        expected: feature + 1,
                        got: x.len(),
                    })?;
                    comparisons += 1;
                    s = if v <= *threshold { then } else { otherwise };
                }
            }
        }
    }

    /// Number of `if` statements in the program.
    pub fn conditionals(&self) -> usize {
        fn count(s: &Stmt) -> usize {
            match s {
                Stmt::Return(_) => 0,
                Stmt::If {
                    then, otherwise, ..
                } => 1 + count(then) + count(otherwise),
            }
        }
        count(&self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{compile_tree, tests::depth1};
    use super::*;
    use crate::learners::Tree;

    const MINIMAL: &str = "\
{{BRANCH c t e}}
({{c}} ? {{t}} : {{e}})
{{FEAT i}}
f{{i}}
{{VER id}}
v{{id}}
{{CMP_LE}}
<=
";

    #[test]
    fn reference_rendering_of_depth1() {
        let spec = compile_tree(&depth1()).unwrap();
        let text = render_template(&spec, REFERENCE_TEMPLATE).unwrap();
        assert_eq!(
            text,
            "int mv_select(const double *x)\n{\n    if (x[0] <= 6) {\n        return 1;\n    } else {\n        return 2;\n    }\n}\n"
        );
        let prog = RenderedProgram::parse(&text).unwrap();
        assert_eq!(prog.conditionals(), 1);
        for x in [3.0, 6.0, 6.5] {
            assert_eq!(prog.eval(&[x]).unwrap(), spec.eval(&[x]).unwrap());
        }
    }

    #[test]
    fn minimal_template() {
        let spec = compile_tree(&depth1()).unwrap();
        let text = render_template(&spec, MINIMAL).unwrap();
        assert_eq!(text, "(f0 <= 6 ? v1 : v2)\n");
        assert_eq!(text.matches('?').count(), 1);
        assert_eq!(text.matches('v').count(), 2);

        let leaf = compile_tree(&Tree::leaf(1, VersionId(3))).unwrap();
        let text = render_template(&leaf, MINIMAL).unwrap();
        assert_eq!(text, "v3\n");
        let text = render_template(&leaf, REFERENCE_TEMPLATE).unwrap();
        assert!(!text.contains("if"));
        assert_eq!(RenderedProgram::parse(&text).unwrap().conditionals(), 0);
    }

    #[test]
    fn missing_or_unknown_placeholder() {
        let spec = compile_tree(&depth1()).unwrap();
        let no_cmp = MINIMAL.replace("{{CMP_LE}}\n<=\n", "");
        let err = render_template(&spec, &no_cmp).unwrap_err();
        assert!(err.to_string().contains("CMP_LE"), "{err}");

        let unknown = MINIMAL.replace("f{{i}}", "f{{j}}");
        assert!(matches!(
            render_template(&spec, &unknown),
            Err(Error::Template(_))
        ));

        let wrong_arity = MINIMAL.replace("{{FEAT i}}", "{{FEAT i j}}");
        assert!(matches!(
            render_template(&spec, &wrong_arity),
            Err(Error::Template(_))
        ));
    }
}
