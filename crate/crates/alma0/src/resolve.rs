//! Name resolution, light type checking, constant folding, and lowering to
//! the checked program form.
//!
//! Lowering hoists every procedure call to statement position (fresh
//! compiler temps hold function results), so checked expressions are
//! call-free. Short-circuit AND/OR whose right operand contains a call are
//! rewritten as IF chains to preserve left-to-right conditional evaluation.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ast;
use crate::ast::{BinOp, UnOp};
use crate::builtins;
use crate::program::*;
use crate::span::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolveError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ResolveError {}

type Result<T> = core::result::Result<T, ResolveError>;

fn err<T>(span: Span, message: impl Into<String>) -> Result<T> {
    Err(ResolveError { span, message: message.into() })
}

/// Resolve and lower a parsed module.
pub fn resolve(module: &ast::Module) -> Result<Program> {
    let mut r = Resolver::default();
    r.run(module)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ConstVal {
    Int(i64),
    Bool(bool),
    Enum(EnumId, u32),
}

#[derive(Clone, Debug)]
enum TypeDef {
    Simple(CellTy),
    Array(ArrayTy),
}

#[derive(Clone, Debug)]
enum Binding {
    Const(ConstVal),
    Type(TypeDef),
    Var { slot: u32, global: bool, ty: SlotTy },
    Proc(ProcId),
}

#[derive(Clone, Debug)]
struct ProcSig {
    name: String,
    params: Vec<Param>,
    result: Option<SlotTy>,
}

#[derive(Default)]
struct Resolver {
    enums: Vec<EnumType>,
    module_scope: BTreeMap<String, Binding>,
    sigs: Vec<ProcSig>,
    globals: SlotLayout,
}

/// Lowering context for one body (module body or one procedure).
struct Ctx<'r> {
    locals: BTreeMap<String, Binding>,
    layout: &'r mut SlotLayout,
    global_body: bool,
    /// Result type when lowering a function body.
    result: Option<SlotTy>,
    in_proc: bool,
    /// RETURN is rejected inside FORALL/COMMIT/NOT scopes.
    barrier_depth: u32,
    temp_count: u32,
}

impl Resolver {
    fn run(&mut self, module: &ast::Module) -> Result<Program> {
        // Pass 1: declarations in textual order; procedure bodies are kept
        // for pass 2 so procedures may call procedures declared later.
        let mut proc_bodies: Vec<&ast::ProcDecl> = Vec::new();
        for decl in &module.decls {
            match decl {
                ast::Decl::Const(items) => {
                    for (name, value) in items {
                        let v = self.fold_const_module(value)?;
                        self.declare_module(name, Binding::Const(v))?;
                    }
                }
                ast::Decl::Type(items) => {
                    for (name, ty) in items {
                        let def = self.type_def(ty)?;
                        if let TypeDef::Simple(CellTy::Enum(id)) = def {
                            let enum_ty = &mut self.enums[id as usize];
                            if enum_ty.name.is_empty() {
                                enum_ty.name = name.text.clone();
                            }
                        }
                        self.declare_module(name, Binding::Type(def))?;
                    }
                }
                ast::Decl::Var(groups) => {
                    for (names, ty) in groups {
                        let def = self.type_def(ty)?;
                        for name in names {
                            let slot = self.globals.slots.len() as u32;
                            let slot_ty = match &def {
                                TypeDef::Simple(ct) => SlotTy::Simple(*ct),
                                TypeDef::Array(at) => SlotTy::Array(at.clone()),
                            };
                            self.globals.slots.push(SlotDecl {
                                name: name.text.clone(),
                                ty: slot_ty.clone(),
                            });
                            self.declare_module(
                                name,
                                Binding::Var { slot, global: true, ty: slot_ty },
                            )?;
                        }
                    }
                }
                ast::Decl::Proc(p) => {
                    let sig = self.proc_sig(p)?;
                    let id = self.sigs.len() as ProcId;
                    self.declare_module(&p.name, Binding::Proc(id))?;
                    self.sigs.push(sig);
                    proc_bodies.push(p);
                }
            }
        }

        // Pass 2: lower procedure bodies, then the module body.
        let mut procs = Vec::new();
        for (id, p) in proc_bodies.iter().enumerate() {
            procs.push(self.lower_proc(id as ProcId, p)?);
        }
        let mut globals = core::mem::take(&mut self.globals);
        let mut ctx = Ctx {
            locals: BTreeMap::new(),
            layout: &mut globals,
            global_body: true,
            result: None,
            in_proc: false,
            barrier_depth: 0,
            temp_count: 0,
        };
        let body = self.lower_seq(&module.body, &mut ctx)?;
        Ok(Program {
            name: module.name.text.clone(),
            enums: core::mem::take(&mut self.enums),
            globals,
            procs,
            body,
        })
    }

    fn declare_module(&mut self, name: &ast::Ident, binding: Binding) -> Result<()> {
        if builtins::is_builtin_name(&name.text) {
            return err(
                name.span,
                format!("'{}' is a built-in procedure and cannot be redeclared", name.text),
            );
        }
        if self.module_scope.insert(name.text.clone(), binding).is_some() {
            return err(name.span, format!("duplicate declaration of '{}'", name.text));
        }
        Ok(())
    }

    // -- types and constants --

    fn type_def(&mut self, ty: &ast::TypeExpr) -> Result<TypeDef> {
        match ty {
            ast::TypeExpr::Integer => Ok(TypeDef::Simple(CellTy::Int)),
            ast::TypeExpr::Boolean => Ok(TypeDef::Simple(CellTy::Bool)),
            ast::TypeExpr::Named(name) => match self.module_scope.get(&name.text) {
                Some(Binding::Type(def)) => Ok(def.clone()),
                Some(_) => err(name.span, format!("'{}' is not a type", name.text)),
                None => err(name.span, format!("undeclared type '{}'", name.text)),
            },
            ast::TypeExpr::Enum(names) => {
                let id = self.enums.len() as EnumId;
                let mut variants = Vec::new();
                for (ord, name) in names.iter().enumerate() {
                    variants.push(name.text.clone());
                    self.declare_module(name, Binding::Const(ConstVal::Enum(id, ord as u32)))?;
                }
                self.enums.push(EnumType { name: String::new(), variants });
                Ok(TypeDef::Simple(CellTy::Enum(id)))
            }
            ast::TypeExpr::Subrange(lo, hi) => {
                let (lo, hi) = self.fold_range(lo, hi)?;
                Ok(TypeDef::Simple(CellTy::IntRange(lo, hi)))
            }
            ast::TypeExpr::Array { ranges, elem } => {
                let mut dims = Vec::new();
                if ranges.len() > 8 {
                    return err(
                        ranges[0].0.span,
                        "arrays support at most eight dimensions",
                    );
                }
                for (lo, hi) in ranges {
                    dims.push(self.fold_range(lo, hi)?);
                }
                let elem_ty = match self.type_def(elem)? {
                    TypeDef::Simple(ct) => ct,
                    TypeDef::Array(_) => {
                        return err(
                            range_span(elem),
                            "array element type must be a simple type",
                        )
                    }
                };
                Ok(TypeDef::Array(ArrayTy { dims, elem: elem_ty }))
            }
        }
    }

    fn fold_range(&self, lo: &ast::Expr, hi: &ast::Expr) -> Result<(i64, i64)> {
        let lo_v = self.fold_int(lo)?;
        let hi_v = self.fold_int(hi)?;
        if lo_v > hi_v {
            return err(lo.span, format!("empty subrange [{}..{}]", lo_v, hi_v));
        }
        Ok((lo_v, hi_v))
    }

    fn fold_int(&self, e: &ast::Expr) -> Result<i64> {
        match self.fold_const_module(e)? {
            ConstVal::Int(v) => Ok(v),
            _ => err(e.span, "constant integer expression required"),
        }
    }

    fn fold_const_module(&self, e: &ast::Expr) -> Result<ConstVal> {
        match &e.kind {
            ast::ExprKind::Int(v) => Ok(ConstVal::Int(*v)),
            ast::ExprKind::Bool(b) => Ok(ConstVal::Bool(*b)),
            ast::ExprKind::Designator { base, indices } if indices.is_empty() => {
                match self.module_scope.get(&base.text) {
                    Some(Binding::Const(v)) => Ok(*v),
                    Some(_) => err(base.span, format!("'{}' is not a constant", base.text)),
                    None => err(base.span, format!("undeclared identifier '{}'", base.text)),
                }
            }
            ast::ExprKind::Unary { op: UnOp::Neg, operand } => {
                match self.fold_const_module(operand)? {
                    ConstVal::Int(v) => Ok(ConstVal::Int(-v)),
                    _ => err(e.span, "constant integer expression required"),
                }
            }
            ast::ExprKind::Binary { op, lhs, rhs } => {
                let l = self.fold_const_module(lhs)?;
                let r = self.fold_const_module(rhs)?;
                match (l, r) {
                    (ConstVal::Int(a), ConstVal::Int(b)) => {
                        let v = match op {
                            BinOp::Add => a.checked_add(b),
                            BinOp::Sub => a.checked_sub(b),
                            BinOp::Mul => a.checked_mul(b),
                            BinOp::Div => a.checked_div(b),
                            BinOp::Mod => a.checked_rem(b),
                            _ => return err(e.span, "non-constant expression"),
                        };
                        match v {
                            Some(v) => Ok(ConstVal::Int(v)),
                            None => err(e.span, "constant expression overflows"),
                        }
                    }
                    _ => err(e.span, "non-constant expression"),
                }
            }
            _ => err(e.span, "non-constant expression"),
        }
    }

    fn proc_sig(&mut self, p: &ast::ProcDecl) -> Result<ProcSig> {
        let mut params = Vec::new();
        for group in &p.params {
            let def = self.type_def(&group.ty)?;
            let mode = match group.mode {
                ast::Mode::Value => Mode::Value,
                ast::Mode::Var => Mode::Var,
                ast::Mode::Mix => Mode::Mix,
            };
            for name in &group.names {
                let ty = match (&def, mode) {
                    (TypeDef::Simple(ct), _) => SlotTy::Simple(*ct),
                    (TypeDef::Array(at), Mode::Value) | (TypeDef::Array(at), Mode::Var) => {
                        SlotTy::Array(at.clone())
                    }
                    (TypeDef::Array(_), Mode::Mix) => {
                        return err(
                            name.span,
                            "MIX parameters are restricted to simple types",
                        )
                    }
                };
                params.push(Param { mode, ty });
            }
        }
        let result = match &p.result {
            None => None,
            Some(ty) => Some(match self.type_def(ty)? {
                TypeDef::Simple(ct) => SlotTy::Simple(ct),
                TypeDef::Array(at) => SlotTy::Array(at),
            }),
        };
        Ok(ProcSig { name: p.name.text.clone(), params, result })
    }

    fn lower_proc(&mut self, id: ProcId, p: &ast::ProcDecl) -> Result<Proc> {
        let sig = self.sigs[id as usize].clone();
        let mut layout = SlotLayout::default();
        let mut locals: BTreeMap<String, Binding> = BTreeMap::new();

        let mut param_index = 0usize;
        for group in &p.params {
            for name in &group.names {
                let ty = sig.params[param_index].ty.clone();
                let slot = layout.slots.len() as u32;
                layout.slots.push(SlotDecl { name: name.text.clone(), ty: ty.clone() });
                declare_local(&mut locals, name, Binding::Var { slot, global: false, ty })?;
                param_index += 1;
            }
        }

        for decl in &p.decls {
            match decl {
                ast::Decl::Const(items) => {
                    for (name, value) in items {
                        let v = self.fold_const_module(value)?;
                        declare_local(&mut locals, name, Binding::Const(v))?;
                    }
                }
                ast::Decl::Type(items) => {
                    if let Some((name, _)) = items.first() {
                        return err(
                            name.span,
                            "type declarations are only supported at module level",
                        );
                    }
                }
                ast::Decl::Var(groups) => {
                    for (names, ty) in groups {
                        let def = self.type_def(ty)?;
                        for name in names {
                            let slot_ty = match &def {
                                TypeDef::Simple(ct) => SlotTy::Simple(*ct),
                                TypeDef::Array(at) => SlotTy::Array(at.clone()),
                            };
                            let slot = layout.slots.len() as u32;
                            layout.slots.push(SlotDecl {
                                name: name.text.clone(),
                                ty: slot_ty.clone(),
                            });
                            declare_local(
                                &mut locals,
                                name,
                                Binding::Var { slot, global: false, ty: slot_ty },
                            )?;
                        }
                    }
                }
                ast::Decl::Proc(_) => unreachable!("parser rejects nested procedures"),
            }
        }

        let mut ctx = Ctx {
            locals,
            layout: &mut layout,
            global_body: false,
            result: sig.result.clone(),
            in_proc: true,
            barrier_depth: 0,
            temp_count: 0,
        };
        let body = self.lower_seq(&p.body, &mut ctx)?;
        Ok(Proc {
            name: sig.name,
            params: sig.params,
            result: sig.result,
            slots: layout,
            body,
            span: p.name.span,
        })
    }

    // -- statement lowering --

    fn lower_seq(&self, stmts: &[ast::Stmt], ctx: &mut Ctx<'_>) -> Result<Vec<Stmt>> {
        let mut out = Vec::new();
        for s in stmts {
            self.lower_stmt(s, ctx, &mut out)?;
        }
        Ok(out)
    }

    fn lower_stmt(&self, s: &ast::Stmt, ctx: &mut Ctx<'_>, out: &mut Vec<Stmt>) -> Result<()> {
        let span = s.span;
        match &s.kind {
            ast::StmtKind::Assign { target, value } => {
                let (base, indices) = designator_parts(target)?;
                let (dest, dest_ty) = self.designator(base, indices, ctx, out)?;
                match dest_ty {
                    DesTy::Simple(ct) => {
                        // direct function-call assignment avoids a temp
                        if let ast::ExprKind::Call { callee, args } = &value.kind {
                            if let Some(Binding::Proc(id)) = self.lookup(ctx, &callee.text) {
                                let sig = &self.sigs[id as usize];
                                let result = sig.result.clone();
                                match result {
                                    Some(SlotTy::Simple(rt))
                                        if rt.category() == ct.category() =>
                                    {
                                        let args =
                                            self.lower_args(id, callee, args, ctx, out)?;
                                        out.push(Stmt::Call {
                                            proc: id,
                                            args,
                                            dest: Some(dest),
                                            span,
                                        });
                                        return Ok(());
                                    }
                                    Some(SlotTy::Simple(_)) => {
                                        return err(
                                            value.span,
                                            "function result type does not match the assignment target",
                                        )
                                    }
                                    Some(SlotTy::Array(_)) => {
                                        return err(
                                            value.span,
                                            "array-valued function assigned to a simple variable",
                                        )
                                    }
                                    None => {
                                        return err(
                                            value.span,
                                            format!("procedure '{}' has no result", callee.text),
                                        )
                                    }
                                }
                            }
                        }
                        let (src, src_cat) = self.lower_expr(value, ctx, out)?;
                        require_cat(value.span, src_cat, ct.category())?;
                        out.push(Stmt::Assign { dest, src, span });
                    }
                    DesTy::Array(at) => {
                        // whole-array assignment: either a copy or a call result
                        match &value.kind {
                            ast::ExprKind::Designator { base, indices } => {
                                let (src, src_ty) =
                                    self.designator(base, indices, ctx, out)?;
                                match src_ty {
                                    DesTy::Array(src_at) if src_at == at => {
                                        out.push(Stmt::ArrayCopy { dest, src, span });
                                    }
                                    DesTy::Array(_) => {
                                        return err(
                                            value.span,
                                            "array assignment requires identical array types",
                                        )
                                    }
                                    DesTy::Simple(_) => {
                                        return err(
                                            value.span,
                                            "cannot assign a simple value to an array",
                                        )
                                    }
                                }
                            }
                            ast::ExprKind::Call { callee, args } => {
                                match self.lookup(ctx, &callee.text) {
                                    Some(Binding::Proc(id)) => {
                                        let sig = &self.sigs[id as usize];
                                        match &sig.result {
                                            Some(SlotTy::Array(rt)) if *rt == at => {}
                                            Some(_) => {
                                                return err(
                                                    value.span,
                                                    "function result type does not match the assignment target",
                                                )
                                            }
                                            None => {
                                                return err(
                                                    value.span,
                                                    format!(
                                                        "procedure '{}' has no result",
                                                        callee.text
                                                    ),
                                                )
                                            }
                                        }
                                        let args =
                                            self.lower_args(id, callee, args, ctx, out)?;
                                        out.push(Stmt::Call {
                                            proc: id,
                                            args,
                                            dest: Some(dest),
                                            span,
                                        });
                                    }
                                    _ => {
                                        return err(
                                            callee.span,
                                            format!("undeclared procedure '{}'", callee.text),
                                        )
                                    }
                                }
                            }
                            _ => {
                                return err(
                                    value.span,
                                    "an array can only be assigned from an array variable or function call",
                                )
                            }
                        }
                    }
                }
            }
            ast::StmtKind::Expr(e) => self.lower_expr_stmt(e, span, ctx, out)?,
            ast::StmtKind::If { cond, then_branch, else_branch } => {
                let (cond, cat) = self.lower_expr(cond, ctx, out)?;
                require_cat(span, cat, Category::Bool)?;
                let then_branch = self.lower_seq(then_branch, ctx)?;
                let else_branch = self.lower_seq(else_branch, ctx)?;
                out.push(Stmt::If { cond, then_branch, else_branch, span });
            }
            ast::StmtKind::While { cond, body } => {
                let mut cond_pre = Vec::new();
                let (cond, cat) = self.lower_expr(cond, ctx, &mut cond_pre)?;
                require_cat(span, cat, Category::Bool)?;
                let body = self.lower_seq(body, ctx)?;
                out.push(Stmt::While { cond_pre, cond, body, span });
            }
            ast::StmtKind::For { var, lo, hi, body }
            | ast::StmtKind::Some { var, lo, hi, body } => {
                let is_some = matches!(s.kind, ast::StmtKind::Some { .. });
                let slot = self.int_var(var, ctx)?;
                let (lo, lo_cat) = self.lower_expr(lo, ctx, out)?;
                require_cat(lo.span, lo_cat, Category::Int)?;
                let (hi, hi_cat) = self.lower_expr(hi, ctx, out)?;
                require_cat(hi.span, hi_cat, Category::Int)?;
                let body = self.lower_seq(body, ctx)?;
                out.push(if is_some {
                    Stmt::Some { var: slot, lo, hi, body, span }
                } else {
                    Stmt::For { var: slot, lo, hi, body, span }
                });
            }
            ast::StmtKind::Either { branches } => {
                let mut lowered = Vec::new();
                for b in branches {
                    lowered.push(self.lower_seq(b, ctx)?);
                }
                out.push(Stmt::Either { branches: lowered, span });
            }
            ast::StmtKind::Forall { generator, body } => {
                ctx.barrier_depth += 1;
                let generator = self.lower_seq(generator, ctx)?;
                let body = self.lower_seq(body, ctx)?;
                ctx.barrier_depth -= 1;
                out.push(Stmt::Forall { generator, body, span });
            }
            ast::StmtKind::Commit { body } => {
                ctx.barrier_depth += 1;
                let body = self.lower_seq(body, ctx)?;
                ctx.barrier_depth -= 1;
                out.push(Stmt::Commit { body, span });
            }
            ast::StmtKind::Not(inner) => {
                ctx.barrier_depth += 1;
                let mut body = Vec::new();
                self.lower_stmt(inner, ctx, &mut body)?;
                ctx.barrier_depth -= 1;
                out.push(Stmt::Not { body, span });
            }
            ast::StmtKind::Return(value) => {
                if !ctx.in_proc {
                    return err(span, "RETURN outside a procedure");
                }
                if ctx.barrier_depth > 0 {
                    return err(
                        span,
                        "RETURN inside FORALL, COMMIT or NOT is not supported",
                    );
                }
                let ret = match (&ctx.result.clone(), value) {
                    (None, None) => None,
                    (None, Some(e)) => {
                        return err(e.span, "RETURN with a value in a proper procedure")
                    }
                    (Some(_), None) => {
                        return err(span, "function RETURN requires a value")
                    }
                    (Some(SlotTy::Simple(ct)), Some(e)) => {
                        let (e, cat) = self.lower_expr(e, ctx, out)?;
                        require_cat(e.span, cat, ct.category())?;
                        Some(RetValue::Simple(e))
                    }
                    (Some(SlotTy::Array(at)), Some(e)) => {
                        let (base, indices) = designator_parts(e)?;
                        let (d, dty) = self.designator(base, indices, ctx, out)?;
                        match dty {
                            DesTy::Array(dat) if dat == *at => Some(RetValue::Array(d)),
                            _ => {
                                return err(
                                    e.span,
                                    "RETURN value does not match the function's array result type",
                                )
                            }
                        }
                    }
                };
                out.push(Stmt::Return { value: ret, span });
            }
            ast::StmtKind::Write { items, newline } => {
                let mut lowered = Vec::new();
                for item in items {
                    if let ast::ExprKind::Str(s) = &item.kind {
                        lowered.push(WriteItem::Str(s.clone()));
                    } else {
                        let (e, _cat) = self.lower_expr(item, ctx, out)?;
                        lowered.push(WriteItem::Value(e));
                    }
                }
                out.push(Stmt::Write { items: lowered, newline: *newline, span });
            }
        }
        Ok(())
    }

    /// A bare expression at statement position: a call, the generalized
    /// equality, or a boolean test.
    fn lower_expr_stmt(
        &self,
        e: &ast::Expr,
        span: Span,
        ctx: &mut Ctx<'_>,
        out: &mut Vec<Stmt>,
    ) -> Result<()> {
        match &e.kind {
            ast::ExprKind::Call { callee, args } => {
                if let Some(b) = builtins::builtin(&callee.text) {
                    let stmt = self.lower_builtin(b, callee, args, ctx, out, span)?;
                    out.push(stmt);
                    return Ok(());
                }
                match self.lookup(ctx, &callee.text) {
                    Some(Binding::Proc(id)) => {
                        if self.sigs[id as usize].result.is_some() {
                            return err(
                                span,
                                format!(
                                    "result of function '{}' would be discarded",
                                    callee.text
                                ),
                            );
                        }
                        let args = self.lower_args(id, callee, args, ctx, out)?;
                        out.push(Stmt::Call { proc: id, args, dest: None, span });
                    }
                    Some(_) => {
                        return err(callee.span, format!("'{}' is not a procedure", callee.text))
                    }
                    None => {
                        return err(
                            callee.span,
                            format!("undeclared procedure '{}'", callee.text),
                        )
                    }
                }
                Ok(())
            }
            // parameterless procedure call written without parentheses
            ast::ExprKind::Designator { base, indices }
                if indices.is_empty()
                    && matches!(self.lookup(ctx, &base.text), Some(Binding::Proc(_))) =>
            {
                if let Some(Binding::Proc(id)) = self.lookup(ctx, &base.text) {
                    if self.sigs[id as usize].result.is_some() {
                        return err(
                            span,
                            format!("result of function '{}' would be discarded", base.text),
                        );
                    }
                    if !self.sigs[id as usize].params.is_empty() {
                        return err(
                            span,
                            format!("procedure '{}' expects arguments", base.text),
                        );
                    }
                    out.push(Stmt::Call { proc: id, args: Vec::new(), dest: None, span });
                }
                Ok(())
            }
            // generalized equality: `=` at the top of a statement expression
            ast::ExprKind::Binary { op: BinOp::Eq, lhs, rhs } => {
                let (l, lc) = self.lower_eq_operand(lhs, ctx, out)?;
                let (r, rc) = self.lower_eq_operand(rhs, ctx, out)?;
                if lc != rc {
                    return err(
                        span,
                        "operands of '=' must have the same simple type",
                    );
                }
                out.push(Stmt::Equal { lhs: l, rhs: r, span });
                Ok(())
            }
            _ => {
                let (expr, cat) = self.lower_expr(e, ctx, out)?;
                if cat != Category::Bool {
                    return err(span, "a statement expression must be BOOLEAN");
                }
                out.push(Stmt::Test { expr, span });
                Ok(())
            }
        }
    }

    /// Equality operands stay designators when they are designators so the
    /// engine can bind; anything else lowers as a plain value expression.
    fn lower_eq_operand(
        &self,
        e: &ast::Expr,
        ctx: &mut Ctx<'_>,
        out: &mut Vec<Stmt>,
    ) -> Result<(Expr, Category)> {
        if let ast::ExprKind::Designator { base, indices } = &e.kind {
            if let Some(Binding::Var { .. }) = self.lookup(ctx, &base.text) {
                let (d, dty) = self.designator(base, indices, ctx, out)?;
                return match dty {
                    DesTy::Simple(ct) => {
                        let cat = ct.category();
                        Ok((Expr { kind: ExprKind::Load(d), span: e.span }, cat))
                    }
                    DesTy::Array(_) => err(
                        e.span,
                        "equality on whole arrays is not supported; operands must be simple-typed",
                    ),
                };
            }
        }
        self.lower_expr(e, ctx, out)
    }

    fn lower_builtin(
        &self,
        which: BuiltinProc,
        callee: &ast::Ident,
        args: &[ast::Expr],
        ctx: &mut Ctx<'_>,
        out: &mut Vec<Stmt>,
        span: Span,
    ) -> Result<Stmt> {
        let mut places = Vec::new();
        match which {
            BuiltinProc::Print => {
                if args.len() != 1 {
                    return err(span, "Print expects exactly one argument");
                }
                // Print takes a designator (simple, row, or board ...
                if let ast::ExprKind::Designator { base, indices } = &args[0].kind {
                    if let Some(Binding::Var { .. }) = self.lookup(ctx, &base.text) {
                        let (d, dty) = self.designator(base, indices, ctx, out)?;
                        if let DesTy::Array(at) = &dty {
                            if at.dims.len() > 2 {
                                return err(
                                    args[0].span,
                                    "Print supports at most two array dimensions",
                                );
                            }
                        }
                        places.push(d);
                        return Ok(Stmt::Builtin { which, args: places, span });
                    }
                }
                // ... or a simple constant value, printed via a hidden temp
                let (e, cat) = self.lower_expr(&args[0], ctx, out)?;
                let ct = match cat {
                    Category::Int => CellTy::Int,
                    Category::Bool => CellTy::Bool,
                    Category::Enum(id) => CellTy::Enum(id),
                };
                let temp = fresh_temp(ctx, SlotTy::Simple(ct));
                let dest = Designator {
                    base: temp,
                    indices: Vec::new(),
                    span: args[0].span,
                };
                out.push(Stmt::Assign { dest: dest.clone(), src: e, span });
                places.push(dest);
            }
            BuiltinProc::PrintSolution => {
                if args.len() != 2 {
                    return err(span, "PrintSolution expects two array arguments");
                }
                for a in args {
                    let (base, indices) = designator_parts(a)?;
                    let (d, dty) = self.designator(base, indices, ctx, out)?;
                    match dty {
                        DesTy::Array(at)
                            if at.dims.len() == 2 && at.elem.category() == Category::Bool => {}
                        _ => {
                            return err(
                                a.span,
                                "PrintSolution expects two-dimensional BOOLEAN matrices",
                            )
                        }
                    }
                    places.push(d);
                }
            }
            BuiltinProc::Initialize => {
                if args.len() != 4 {
                    return err(span, "Initialize expects four array arguments");
                }
                let mut tys = Vec::new();
                for a in args {
                    let (base, indices) = designator_parts(a)?;
                    let (d, dty) = self.designator(base, indices, ctx, out)?;
                    match dty {
                        DesTy::Array(at) => tys.push(at),
                        DesTy::Simple(_) => {
                            return err(a.span, "Initialize expects array arguments")
                        }
                    }
                    places.push(d);
                }
                builtins::check_initialize_shapes(&tys)
                    .map_err(|m| ResolveError { span, message: m })?;
            }
        }
        let _ = callee;
        Ok(Stmt::Builtin { which, args: places, span })
    }

    fn lower_args(
        &self,
        id: ProcId,
        callee: &ast::Ident,
        args: &[ast::Expr],
        ctx: &mut Ctx<'_>,
        out: &mut Vec<Stmt>,
    ) -> Result<Vec<Arg>> {
        let sig = &self.sigs[id as usize];
        if sig.params.len() != args.len() {
            return err(
                callee.span,
                format!(
                    "'{}' expects {} argument(s), got {}",
                    callee.text,
                    sig.params.len(),
                    args.len()
                ),
            );
        }
        let mut lowered = Vec::new();
        for (param, actual) in sig.params.iter().zip(args) {
            let arg = match (&param.ty, param.mode) {
                (SlotTy::Simple(ct), Mode::Value) => {
                    let (e, cat) = self.lower_expr(actual, ctx, out)?;
                    require_cat(actual.span, cat, ct.category())?;
                    Arg::Value(e)
                }
                (SlotTy::Simple(ct), Mode::Var) => {
                    let (d, dty) = self.var_designator(actual, ctx, out)?;
                    match dty {
                        DesTy::Simple(act) if act.category() == ct.category() => Arg::Ref(d),
                        DesTy::Simple(_) => {
                            return err(actual.span, "VAR argument has the wrong type")
                        }
                        DesTy::Array(_) => {
                            return err(
                                actual.span,
                                "VAR parameter of simple type needs a simple variable",
                            )
                        }
                    }
                }
                (SlotTy::Simple(ct), Mode::Mix) => {
                    // a variable aliases; any other expression passes its value
                    if let Ok((d, dty)) = self.try_var_designator(actual, ctx, out) {
                        match dty {
                            DesTy::Simple(act) if act.category() == ct.category() => Arg::Ref(d),
                            DesTy::Simple(_) => {
                                return err(actual.span, "MIX argument has the wrong type")
                            }
                            DesTy::Array(_) => {
                                return err(
                                    actual.span,
                                    "MIX parameters are restricted to simple types",
                                )
                            }
                        }
                    } else {
                        let (e, cat) = self.lower_expr(actual, ctx, out)?;
                        require_cat(actual.span, cat, ct.category())?;
                        Arg::MixValue(e)
                    }
                }
                (SlotTy::Array(at), Mode::Value) => {
                    let (d, dty) = self.var_designator(actual, ctx, out)?;
                    match dty {
                        DesTy::Array(aat) if aat == *at => Arg::ValueArray(d),
                        _ => {
                            return err(
                                actual.span,
                                "array argument does not match the parameter type",
                            )
                        }
                    }
                }
                (SlotTy::Array(at), Mode::Var) => {
                    let (d, dty) = self.var_designator(actual, ctx, out)?;
                    match dty {
                        DesTy::Array(aat) if aat == *at => Arg::Ref(d),
                        _ => {
                            return err(
                                actual.span,
                                "VAR array argument does not match the parameter type",
                            )
                        }
                    }
                }
                (SlotTy::Array(_), Mode::Mix) => unreachable!("rejected in proc_sig"),
            };
            lowered.push(arg);
        }
        Ok(lowered)
    }

    /// Resolve an actual that must be a variable designator.
    fn var_designator(
        &self,
        e: &ast::Expr,
        ctx: &mut Ctx<'_>,
        out: &mut Vec<Stmt>,
    ) -> Result<(Designator, DesTy)> {
        let (base, indices) = match &e.kind {
            ast::ExprKind::Designator { base, indices } => (base, indices),
            _ => return err(e.span, "this argument is not a variable"),
        };
        match self.lookup(ctx, &base.text) {
            Some(Binding::Var { .. }) => self.designator(base, indices, ctx, out),
            Some(_) => err(base.span, format!("'{}' is not a variable", base.text)),
            None => err(base.span, format!("undeclared identifier '{}'", base.text)),
        }
    }

    fn try_var_designator(
        &self,
        e: &ast::Expr,
        ctx: &mut Ctx<'_>,
        out: &mut Vec<Stmt>,
    ) -> Result<(Designator, DesTy)> {
        if let ast::ExprKind::Designator { base, .. } = &e.kind {
            if let Some(Binding::Var { .. }) = self.lookup(ctx, &base.text) {
                return self.var_designator(e, ctx, out);
            }
        }
        err(e.span, "not a variable")
    }

    // -- expressions --

    fn lower_expr(
        &self,
        e: &ast::Expr,
        ctx: &mut Ctx<'_>,
        out: &mut Vec<Stmt>,
    ) -> Result<(Expr, Category)> {
        let span = e.span;
        match &e.kind {
            ast::ExprKind::Int(v) => {
                Ok((Expr { kind: ExprKind::Int(*v), span }, Category::Int))
            }
            ast::ExprKind::Bool(b) => {
                Ok((Expr { kind: ExprKind::Bool(*b), span }, Category::Bool))
            }
            ast::ExprKind::Str(_) => err(
                span,
                "string literals are only permitted as WRITE/WRITELN arguments",
            ),
            ast::ExprKind::Designator { base, indices } => {
                match self.lookup(ctx, &base.text) {
                    Some(Binding::Const(v)) => {
                        if !indices.is_empty() {
                            return err(span, format!("'{}' is not an array", base.text));
                        }
                        Ok(const_expr(v, span))
                    }
                    Some(Binding::Var { .. }) => {
                        let (d, dty) = self.designator(base, indices, ctx, out)?;
                        match dty {
                            DesTy::Simple(ct) => {
                                let cat = ct.category();
                                Ok((Expr { kind: ExprKind::Load(d), span }, cat))
                            }
                            DesTy::Array(_) => err(
                                span,
                                format!("array '{}' cannot be used as a value", base.text),
                            ),
                        }
                    }
                    Some(Binding::Proc(_)) => {
                        err(span, format!("procedure '{}' used as a value", base.text))
                    }
                    Some(Binding::Type(_)) => {
                        err(span, format!("type '{}' used as a value", base.text))
                    }
                    None => err(span, format!("undeclared identifier '{}'", base.text)),
                }
            }
            ast::ExprKind::Call { callee, args } => {
                if builtins::builtin(&callee.text).is_some() {
                    return err(
                        span,
                        format!("built-in procedure '{}' has no result", callee.text),
                    );
                }
                let id = match self.lookup(ctx, &callee.text) {
                    Some(Binding::Proc(id)) => id,
                    Some(_) => {
                        return err(callee.span, format!("'{}' is not a procedure", callee.text))
                    }
                    None => {
                        return err(
                            callee.span,
                            format!("undeclared procedure '{}'", callee.text),
                        )
                    }
                };
                let result = match &self.sigs[id as usize].result {
                    Some(SlotTy::Simple(ct)) => *ct,
                    Some(SlotTy::Array(_)) => {
                        return err(
                            span,
                            "an array-valued call can only be assigned to an array variable",
                        )
                    }
                    None => {
                        return err(
                            span,
                            format!("procedure '{}' has no result", callee.text),
                        )
                    }
                };
                let args = self.lower_args(id, callee, args, ctx, out)?;
                let temp = fresh_temp(ctx, SlotTy::Simple(result));
                let dest = Designator { base: temp, indices: Vec::new(), span };
                out.push(Stmt::Call { proc: id, args, dest: Some(dest.clone()), span });
                Ok((
                    Expr { kind: ExprKind::Load(dest), span },
                    result.category(),
                ))
            }
            ast::ExprKind::Unary { op, operand } => {
                let (inner, cat) = self.lower_expr(operand, ctx, out)?;
                let want = match op {
                    UnOp::Neg => Category::Int,
                    UnOp::Not => Category::Bool,
                };
                require_cat(span, cat, want)?;
                Ok((
                    Expr {
                        kind: ExprKind::Unary { op: *op, operand: Box::new(inner) },
                        span,
                    },
                    want,
                ))
            }
            ast::ExprKind::Binary { op, lhs, rhs } => {
                // Conditional evaluation: a call on the right of AND/OR only
                // runs when the left side allows it, so rewrite via IF.
                if matches!(op, BinOp::And | BinOp::Or) && contains_call(rhs) {
                    let (l, lc) = self.lower_expr(lhs, ctx, out)?;
                    require_cat(lhs.span, lc, Category::Bool)?;
                    let temp = fresh_temp(ctx, SlotTy::Simple(CellTy::Bool));
                    let dest = Designator { base: temp, indices: Vec::new(), span };
                    let mut eval_rhs = Vec::new();
                    let (r, rc) = self.lower_expr(rhs, ctx, &mut eval_rhs)?;
                    require_cat(rhs.span, rc, Category::Bool)?;
                    eval_rhs.push(Stmt::Assign { dest: dest.clone(), src: r, span });
                    let short = Vec::from([Stmt::Assign {
                        dest: dest.clone(),
                        src: Expr {
                            kind: ExprKind::Bool(matches!(op, BinOp::Or)),
                            span,
                        },
                        span,
                    }]);
                    let (then_branch, else_branch) = if matches!(op, BinOp::And) {
                        (eval_rhs, short)
                    } else {
                        (short, eval_rhs)
                    };
                    out.push(Stmt::If { cond: l, then_branch, else_branch, span });
                    return Ok((
                        Expr { kind: ExprKind::Load(dest), span },
                        Category::Bool,
                    ));
                }
                let (l, lc) = self.lower_expr(lhs, ctx, out)?;
                let (r, rc) = self.lower_expr(rhs, ctx, out)?;
                let cat = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                        require_cat(lhs.span, lc, Category::Int)?;
                        require_cat(rhs.span, rc, Category::Int)?;
                        Category::Int
                    }
                    BinOp::Less | BinOp::LessEq | BinOp::Greater | BinOp::GreaterEq => {
                        require_cat(lhs.span, lc, Category::Int)?;
                        require_cat(rhs.span, rc, Category::Int)?;
                        Category::Bool
                    }
                    BinOp::Eq | BinOp::NotEq => {
                        if lc != rc {
                            return err(
                                span,
                                "comparison operands must have the same simple type",
                            );
                        }
                        Category::Bool
                    }
                    BinOp::And | BinOp::Or => {
                        require_cat(lhs.span, lc, Category::Bool)?;
                        require_cat(rhs.span, rc, Category::Bool)?;
                        Category::Bool
                    }
                };
                Ok((
                    Expr {
                        kind: ExprKind::Binary { op: *op, lhs: Box::new(l), rhs: Box::new(r) },
                        span,
                    },
                    cat,
                ))
            }
            ast::ExprKind::Known(inner) => {
                let name_ok = matches!(
                    &inner.kind,
                    ast::ExprKind::Designator { base, .. }
                        if matches!(self.lookup(ctx, &base.text), Some(Binding::Var { .. }))
                );
                if !name_ok {
                    return err(inner.span, "KNOWN expects a variable designator");
                }
                let (base, indices) = designator_parts(inner)?;
                let (d, _) = self.designator(base, indices, ctx, out)?;
                Ok((Expr { kind: ExprKind::Known(d), span }, Category::Bool))
            }
        }
    }

    /// Resolve `base[indices]` against the declared variable.
    fn designator(
        &self,
        base: &ast::Ident,
        indices: &[ast::Expr],
        ctx: &mut Ctx<'_>,
        out: &mut Vec<Stmt>,
    ) -> Result<(Designator, DesTy)> {
        let (slot, global, ty) = match self.lookup(ctx, &base.text) {
            Some(Binding::Var { slot, global, ty }) => (slot, global, ty),
            Some(_) => return err(base.span, format!("'{}' is not a variable", base.text)),
            None => {
                return err(base.span, format!("undeclared identifier '{}'", base.text))
            }
        };
        let slot_ref = if global { SlotRef::Global(slot) } else { SlotRef::Local(slot) };
        let mut lowered = Vec::new();
        for ix in indices {
            let (e, cat) = self.lower_expr(ix, ctx, out)?;
            require_cat(ix.span, cat, Category::Int)?;
            lowered.push(e);
        }
        let dty = match ty {
            SlotTy::Simple(ct) => {
                if !indices.is_empty() {
                    return err(base.span, format!("'{}' is not an array", base.text));
                }
                DesTy::Simple(ct)
            }
            SlotTy::Array(at) => {
                if indices.is_empty() {
                    DesTy::Array(at)
                } else if indices.len() == at.dims.len() {
                    DesTy::Simple(at.elem)
                } else {
                    return err(
                        base.span,
                        format!(
                            "'{}' has {} dimension(s) but {} index(es) given",
                            base.text,
                            at.dims.len(),
                            indices.len()
                        ),
                    );
                }
            }
        };
        Ok((
            Designator { base: slot_ref, indices: lowered, span: base.span },
            dty,
        ))
    }

    fn int_var(&self, name: &ast::Ident, ctx: &mut Ctx<'_>) -> Result<SlotRef> {
        match self.lookup(ctx, &name.text) {
            Some(Binding::Var { slot, global, ty: SlotTy::Simple(ct) })
                if ct.category() == Category::Int =>
            {
                Ok(if global { SlotRef::Global(slot) } else { SlotRef::Local(slot) })
            }
            Some(Binding::Var { .. }) => err(
                name.span,
                format!("control variable '{}' must be a simple INTEGER variable", name.text),
            ),
            Some(_) => err(name.span, format!("'{}' is not a variable", name.text)),
            None => err(name.span, format!("undeclared identifier '{}'", name.text)),
        }
    }

    fn lookup(&self, ctx: &Ctx<'_>, name: &str) -> Option<Binding> {
        ctx.locals
            .get(name)
            .or_else(|| self.module_scope.get(name))
            .cloned()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum DesTy {
    Simple(CellTy),
    Array(ArrayTy),
}

fn declare_local(
    locals: &mut BTreeMap<String, Binding>,
    name: &ast::Ident,
    binding: Binding,
) -> Result<()> {
    if builtins::is_builtin_name(&name.text) {
        return err(
            name.span,
            format!("'{}' is a built-in procedure and cannot be redeclared", name.text),
        );
    }
    if locals.insert(name.text.clone(), binding).is_some() {
        return err(name.span, format!("duplicate declaration of '{}'", name.text));
    }
    Ok(())
}

fn fresh_temp(ctx: &mut Ctx<'_>, ty: SlotTy) -> SlotRef {
    let slot = ctx.layout.slots.len() as u32;
    let name = format!("$t{}", ctx.temp_count);
    ctx.temp_count += 1;
    ctx.layout.slots.push(SlotDecl { name, ty });
    if ctx.global_body {
        SlotRef::Global(slot)
    } else {
        SlotRef::Local(slot)
    }
}

fn designator_parts(e: &ast::Expr) -> Result<(&ast::Ident, &[ast::Expr])> {
    match &e.kind {
        ast::ExprKind::Designator { base, indices } => Ok((base, indices)),
        _ => err(e.span, "a variable designator is required here"),
    }
}

fn const_expr(v: ConstVal, span: Span) -> (Expr, Category) {
    match v {
        ConstVal::Int(i) => (Expr { kind: ExprKind::Int(i), span }, Category::Int),
        ConstVal::Bool(b) => (Expr { kind: ExprKind::Bool(b), span }, Category::Bool),
        ConstVal::Enum(id, ord) => (
            Expr { kind: ExprKind::EnumConst(id, ord), span },
            Category::Enum(id),
        ),
    }
}

fn require_cat(span: Span, got: Category, want: Category) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        let name = |c: Category| match c {
            Category::Int => "INTEGER",
            Category::Bool => "BOOLEAN",
            Category::Enum(_) => "enumeration",
        };
        err(span, format!("expected {} operand, found {}", name(want), name(got)))
    }
}

fn contains_call(e: &ast::Expr) -> bool {
    match &e.kind {
        ast::ExprKind::Call { .. } => true,
        ast::ExprKind::Int(_)
        | ast::ExprKind::Bool(_)
        | ast::ExprKind::Str(_)
        | ast::ExprKind::Known(_) => false,
        ast::ExprKind::Designator { indices, .. } => indices.iter().any(contains_call),
        ast::ExprKind::Unary { operand, .. } => contains_call(operand),
        ast::ExprKind::Binary { lhs, rhs, .. } => contains_call(lhs) || contains_call(rhs),
    }
}

fn range_span(t: &ast::TypeExpr) -> Span {
    match t {
        ast::TypeExpr::Named(n) => n.span,
        ast::TypeExpr::Subrange(lo, _) => lo.span,
        ast::TypeExpr::Array { ranges, .. } => {
            ranges.first().map(|(lo, _)| lo.span).unwrap_or_else(Span::synthetic)
        }
        ast::TypeExpr::Enum(names) => {
            names.first().map(|n| n.span).unwrap_or_else(Span::synthetic)
        }
        _ => Span::synthetic(),
    }
}
