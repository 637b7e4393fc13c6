#include <algorithm>
#include <cmath>

#include "edgeflow/expr/expr.hpp"

namespace edgeflow::expr {

namespace {

double checked(double v) {
  if (!std::isfinite(v)) throw NonFiniteResult();
  return v;
}

}  // namespace

Program::Program(const Expr& e) {
  emit(e);
  // Depth bound: every instruction pushes at most one value.
  max_depth_ = code_.size();
}

std::size_t Program::slot_for(const std::string& name) {
  const auto it = std::find(slots_.begin(), slots_.end(), name);
  if (it != slots_.end()) return static_cast<std::size_t>(it - slots_.begin());
  slots_.push_back(name);
  return slots_.size() - 1;
}

void Program::emit(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::number:
      code_.push_back({Code::push_const, e.number});
      return;
    case Expr::Kind::variable:
      code_.push_back({Code::push_slot, 0.0, slot_for(e.name)});
      return;
    case Expr::Kind::negate:
      emit(e.args[0]);
      code_.push_back({Code::negate});
      return;
    case Expr::Kind::binary: {
      emit(e.args[0]);
      emit(e.args[1]);
      static constexpr Code table[] = {Code::add, Code::sub, Code::mul, Code::div, Code::lt,
                                       Code::le,  Code::gt,  Code::ge,  Code::eq,  Code::ne};
      code_.push_back({table[static_cast<std::size_t>(e.op)]});
      return;
    }
    case Expr::Kind::call:
      if (e.function == Function::if_) {
        emit(e.args[0]);
        const std::size_t branch = code_.size();
        code_.push_back({Code::jump_if_zero});
        emit(e.args[1]);
        const std::size_t skip = code_.size();
        code_.push_back({Code::jump});
        code_[branch].operand = code_.size();
        emit(e.args[2]);
        code_[skip].operand = code_.size();
        return;
      }
      for (const Expr& a : e.args) emit(a);
      switch (e.function) {
        case Function::min: code_.push_back({Code::min}); break;
        case Function::max: code_.push_back({Code::max}); break;
        case Function::abs: code_.push_back({Code::abs}); break;
        case Function::clamp: code_.push_back({Code::clamp}); break;
        case Function::if_: break;
      }
      return;
  }
}

double Program::eval(const Bindings& env) const {
  std::vector<double> values;
  values.reserve(slots_.size());
  for (const std::string& name : slots_) {
    const auto it = env.find(name);
    if (it == env.end()) throw UnboundVariable(name);
    values.push_back(it->second);
  }
  return eval_slots(values);
}

double Program::eval_slots(const std::vector<double>& values) const {
  std::vector<double> stack;
  stack.reserve(max_depth_);
  auto pop = [&stack] {
    const double v = stack.back();
    stack.pop_back();
    return v;
  };

  std::size_t pc = 0;
  while (pc < code_.size()) {
    const Instr& in = code_[pc++];
    switch (in.code) {
      case Code::push_const:
        stack.push_back(in.constant);
        break;
      case Code::push_slot:
        stack.push_back(checked(values[in.operand]));
        break;
      case Code::negate:
        stack.back() = -stack.back();
        break;
      case Code::abs:
        stack.back() = std::fabs(stack.back());
        break;
      case Code::jump_if_zero:
        if (pop() == 0.0) pc = in.operand;
        break;
      case Code::jump:
        pc = in.operand;
        break;
      case Code::clamp: {
        const double hi = pop();
        const double lo = pop();
        double x = stack.back();
        x = x < lo ? lo : x;
        stack.back() = hi < x ? hi : x;
        break;
      }
      default: {
        const double b = pop();
        const double a = stack.back();
        double r = 0.0;
        switch (in.code) {
          case Code::add: r = checked(a + b); break;
          case Code::sub: r = checked(a - b); break;
          case Code::mul: r = checked(a * b); break;
          case Code::div:
            if (b == 0.0) throw DivisionByZero();
            r = checked(a / b);
            break;
          case Code::lt: r = a < b ? 1.0 : 0.0; break;
          case Code::le: r = a <= b ? 1.0 : 0.0; break;
          case Code::gt: r = a > b ? 1.0 : 0.0; break;
          case Code::ge: r = a >= b ? 1.0 : 0.0; break;
          case Code::eq: r = a == b ? 1.0 : 0.0; break;
          case Code::ne: r = a != b ? 1.0 : 0.0; break;
          case Code::min: r = b < a ? b : a; break;
          case Code::max: r = a < b ? b : a; break;
          default: break;
        }
        stack.back() = r;
        break;
      }
    }
  }
  return stack.back();
}

double eval(const Expr& e, const Bindings& env) { return Program(e).eval(env); }

}  // namespace edgeflow::expr
