#include "framechange/pulseprog.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "framechange/error.hpp"

namespace framechange {

namespace {

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

bool is_pulse(const Event& e) { return std::holds_alternative<event::HardPulse>(e); }
bool is_delay(const Event& e) { return std::holds_alternative<event::Delay>(e); }

// Cursor over the program text that treats '#'-comments as whitespace.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() {
    skip_space();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  // Raw peek without skipping whitespace; used inside tokens.
  char peek_raw(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void expect(char c, const char* what) {
    if (peek() != c) fail(std::string("expected ") + what);
    advance();
  }

  bool at_word(std::string_view word) {
    skip_space();
    if (text_.substr(pos_, word.size()) != word) return false;
    const char next = peek_raw(word.size());
    return !(std::isalnum(static_cast<unsigned char>(next)) || next == '_');
  }

  void skip_word(std::string_view word) {
    for (std::size_t i = 0; i < word.size(); ++i) advance();
  }

  // Reads a bare token (no whitespace, stops at delimiters).
  std::string token() {
    skip_space();
    std::string out;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '#' || c == '=' || c == ',' ||
          c == '(' || c == ')')
        break;
      out.push_back(c);
      advance();
    }
    return out;
  }

  double number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      const bool exp_sign = (c == '+' || c == '-') && pos_ > start &&
                            (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' ||
          exp_sign || ((c == '-' || c == '+') && pos_ == start)) {
        ++pos_;
      } else {
        break;
      }
    }
    const std::string_view s = text_.substr(start, pos_ - start);
    pos_ = start;
    const std::string_view digits = !s.empty() && s.front() == '+' ? s.substr(1) : s;
    double value = 0.0;
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (s.empty() || res.ec != std::errc() || res.ptr != digits.data() + digits.size()) {
      fail(std::string("expected ") + what);
    }
    for (std::size_t i = 0; i < s.size(); ++i) advance();
    if (!std::isfinite(value)) fail(std::string(what) + " must be finite");
    return value;
  }

  // Skips spaces and tabs only, stopping at the end of a line or a comment.
  bool at_line_end() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r'))
      advance();
    return pos_ >= text_.size() || text_[pos_] == '\n' || text_[pos_] == '#';
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }

  int line() const { return line_; }
  int column() const { return col_; }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : cur_(text) {}

  PulseProgram run() {
    if (cur_.at_word("SEQ")) {
      cur_.skip_word("SEQ");
      header();
    }
    while (!cur_.eof()) block();
    return std::move(prog_);
  }

 private:
  void header() {
    bool first = true;
    while (!cur_.at_line_end()) {
      const int line = cur_.line();
      const int col = cur_.column();
      const std::string key = cur_.token();
      if (key.empty()) cur_.fail("unexpected character in header");
      if (cur_.peek_raw() != '=') {
        if (!first) throw ParseError("header field '" + key + "' needs a value", line, col);
        prog_.name = key;
        first = false;
        continue;
      }
      first = false;
      cur_.advance();
      if (key == "tau0") {
        prog_.tau0_us = nonnegative(cur_.number("tau0 value"), line, col);
        have_tau0_ = true;
      } else if (key == "tp") {
        prog_.tp_us = nonnegative(cur_.number("tp value"), line, col);
      } else if (key == "frame") {
        prog_.frame_deg = cur_.number("frame angle");
      } else if (key == "stage") {
        const std::string value = cur_.token();
        try {
          prog_.stage = parse_stage(value);
        } catch (const InputError& e) {
          throw ParseError(e.what(), line, col);
        }
      } else {
        throw ParseError("unknown header field '" + key + "'", line, col);
      }
    }
  }

  static double nonnegative(double x, int line, int col) {
    if (x < 0.0) throw ParseError("negative duration", line, col);
    return x;
  }

  void block() {
    if (cur_.peek() != 'P') cur_.fail("expected a P( block");
    cur_.advance();
    cur_.expect('(', "'(' after P");
    if (cur_.peek() == ')') {
      cur_.advance();
      return;
    }
    for (;;) {
      item();
      const char c = cur_.peek();
      if (c == ',') {
        cur_.advance();
      } else if (c == ')') {
        cur_.advance();
        return;
      } else {
        cur_.fail("expected ',' or ')'");
      }
    }
  }

  void item() {
    const char c = cur_.peek();
    const int line = cur_.line();
    const int col = cur_.column();
    const char next = cur_.peek_raw(1);
    if (c == 'x' || c == 'y') {
      cur_.advance();
      pulse(c == 'x' ? kPhaseX : kPhaseY, line, col);
    } else if (c == '-' && (next == 'x' || next == 'y')) {
      cur_.advance();
      cur_.advance();
      pulse(next == 'x' ? kPhaseMinusX : kPhaseMinusY, line, col);
    } else if (c == '@') {
      cur_.advance();
      pulse(cur_.number("phase in degrees after '@'"), line, col);
    } else if (c == 'Z' && next == '(') {
      no_frame_events(line, col);
      cur_.advance();
      cur_.advance();
      const double angle = cur_.number("z-rotation angle");
      cur_.expect(')', "')' after z-rotation angle");
      append_event(prog_.events, event::VirtualZ{angle});
    } else if (c == 'T' && next == '(') {
      no_frame_events(line, col);
      cur_.advance();
      cur_.advance();
      const double phase = cur_.number("transient phase");
      cur_.expect(',', "',' in transient");
      const double angle = cur_.number("transient angle");
      cur_.expect(')', "')' after transient");
      append_event(prog_.events, event::Transient{phase, angle});
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
      double d = cur_.number("duration");
      if (cur_.peek() == '*') {
        cur_.advance();
        if (!cur_.at_word("tau0")) cur_.fail("expected 'tau0' after '*'");
        cur_.skip_word("tau0");
        d *= tau0(line, col);
      }
      if (d < 0.0) throw ParseError("negative duration", line, col);
      append_event(prog_.events, event::Delay{d});
    } else if (cur_.at_word("tau0")) {
      cur_.skip_word("tau0");
      append_event(prog_.events, event::Delay{tau0(line, col)});
    } else {
      const std::string tok = cur_.token();
      throw ParseError("unknown axis token '" + (tok.empty() ? std::string(1, c) : tok) + "'",
                       line, col);
    }
  }

  void pulse(double phase, int line, int col) {
    double deflection = 0.0;
    if (cur_.peek_raw() == '~') {
      cur_.advance();
      deflection = cur_.number("deflection after '~'");
    }
    const char c = cur_.peek_raw();
    if (std::isalnum(static_cast<unsigned char>(c))) {
      throw ParseError("unknown axis token", line, col);
    }
    prog_.events.push_back(event::HardPulse{phase, deflection});
  }

  double tau0(int line, int col) const {
    if (!have_tau0_) throw ParseError("tau0 used but not set in the SEQ header", line, col);
    return prog_.tau0_us;
  }

  void no_frame_events(int line, int col) const {
    if (prog_.stage == Stage::Experimental) {
      throw ParseError("frame and transient events are not allowed in an experimental program",
                       line, col);
    }
  }

  Cursor cur_;
  PulseProgram prog_;
  bool have_tau0_ = false;
};

void print_event(std::ostringstream& out, const Event& e) {
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, event::HardPulse>) {
          if (ev.phase_deg == kPhaseX) {
            out << 'x';
          } else if (ev.phase_deg == kPhaseY) {
            out << 'y';
          } else if (ev.phase_deg == kPhaseMinusX) {
            out << "-x";
          } else if (ev.phase_deg == kPhaseMinusY) {
            out << "-y";
          } else {
            out << '@' << format_number(ev.phase_deg);
          }
          if (ev.deflection_rad != 0.0) out << '~' << format_number(ev.deflection_rad);
        } else if constexpr (std::is_same_v<T, event::Delay>) {
          out << format_number(ev.duration_us);
        } else if constexpr (std::is_same_v<T, event::VirtualZ>) {
          out << "Z(" << format_number(ev.angle_deg) << ')';
        } else {
          out << "T(" << format_number(ev.phase_deg) << ',' << format_number(ev.angle_deg)
              << ')';
        }
      },
      e);
}

bool needs_header(const PulseProgram& p) {
  return !p.name.empty() || p.tau0_us != 0.0 || p.tp_us != 0.0 || p.stage != Stage::Logical ||
         p.frame_deg != 0.0;
}

// Items of a sequence block: positive numbers are multiples of tau0, strings are axes.
using BlockItem = std::variant<double, const char*>;

double axis_phase(std::string_view axis) {
  if (axis == "x") return kPhaseX;
  if (axis == "y") return kPhaseY;
  if (axis == "-x") return kPhaseMinusX;
  return kPhaseMinusY;
}

void append_blocks(PulseProgram& p, const std::vector<std::vector<BlockItem>>& blocks,
                   double scale) {
  for (const auto& block : blocks) {
    for (const auto& item : block) {
      if (const double* d = std::get_if<double>(&item)) {
        append_event(p.events, event::Delay{*d * scale});
      } else {
        append_event(p.events, event::HardPulse{axis_phase(std::get<const char*>(item))});
      }
    }
  }
}

double normalize_phase(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  return r == 360.0 ? 0.0 : r;
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Logical:
      return "logical";
    case Stage::Detailed:
      return "detailed";
    case Stage::Experimental:
      return "experimental";
  }
  return "logical";
}

Stage parse_stage(std::string_view text) {
  if (text == "logical") return Stage::Logical;
  if (text == "detailed") return Stage::Detailed;
  if (text == "experimental") return Stage::Experimental;
  throw InputError("unknown stage '" + std::string(text) + "'");
}

int pulse_count(const PulseProgram& p) {
  int n = 0;
  for (const auto& e : p.events) n += is_pulse(e);
  return n;
}

double period_us(const PulseProgram& p) {
  double t = 0.0;
  for (const auto& e : p.events) {
    if (const auto* d = std::get_if<event::Delay>(&e)) t += d->duration_us;
  }
  return t;
}

std::vector<double> pulse_phases(const PulseProgram& p) {
  std::vector<double> out;
  for (const auto& e : p.events) {
    if (const auto* hp = std::get_if<event::HardPulse>(&e)) out.push_back(hp->phase_deg);
  }
  return out;
}

void append_event(std::vector<Event>& events, const Event& e) {
  if (const auto* d = std::get_if<event::Delay>(&e); d && !events.empty()) {
    if (auto* last = std::get_if<event::Delay>(&events.back())) {
      last->duration_us += d->duration_us;
      return;
    }
  }
  events.push_back(e);
}

Wei16Delays wei16_delays(const Wei16Params& q, double tau0_us, double tp_us) {
  const Wei16Delays d{
      tau0_us * (1.0 + q.c - q.v + q.w), tau0_us * (1.0 + q.b - q.u + q.v),
      tau0_us * (1.0 - q.a + q.u - q.w), tau0_us * (1.0 - q.c - q.v + q.w),
      tau0_us * (1.0 - q.b - q.u + q.v), tau0_us * (1.0 + q.a + q.u - q.w)};
  static const char* names[] = {"tau1", "tau2", "tau3", "tau1'", "tau2'", "tau3'"};
  const auto arr = d.as_array();
  // Delays that should vanish exactly (e.g. tau2 for u = 1) come out as round-off.
  const double slack = 1e-12 * tau0_us;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (arr[k] < tp_us - slack || arr[k] < -slack) {
      throw ConstraintError("Wei16 delay " + std::string(names[k]) + " = " +
                            format_number(arr[k]) + " us is shorter than the pulse width " +
                            format_number(tp_us) + " us");
    }
  }
  return d;
}

SequenceName parse_sequence_name(std::string_view text) {
  if (text == "wei16") return SequenceName::Wei16;
  if (text == "angle12") return SequenceName::Angle12;
  if (text == "peng24") return SequenceName::Peng24;
  if (text == "mrev8") return SequenceName::Mrev8;
  throw InputError("unknown sequence '" + std::string(text) +
                   "' (expected wei16, angle12, peng24 or mrev8)");
}

std::string_view sequence_name(SequenceName name) {
  switch (name) {
    case SequenceName::Wei16:
      return "wei16";
    case SequenceName::Angle12:
      return "angle12";
    case SequenceName::Peng24:
      return "peng24";
    case SequenceName::Mrev8:
      return "mrev8";
  }
  return "";
}

PulseProgram build_sequence(SequenceName name, double tau0_us, double tp_us,
                            const Wei16Params& params) {
  if (!(tau0_us > 0.0)) throw InputError("tau0 must be positive");
  if (tp_us < 0.0) throw InputError("tp must be nonnegative");
  PulseProgram p;
  p.name = std::string(sequence_name(name));
  p.tau0_us = tau0_us;
  p.tp_us = tp_us;

  const std::vector<std::vector<BlockItem>> angle12 = {
      {0.5, "-y", 1.0, "x", 1.0, "-x", 0.5},
      {0.5, "y", 1.0, "-x", 1.0, "-x", 0.5},
      {0.5, "-y", 1.0, "x", 1.0, "-x", 0.5},
      {0.5, "y", 1.0, "x", 1.0, "x", 0.5}};

  switch (name) {
    case SequenceName::Wei16: {
      const Wei16Delays d = wei16_delays(params, 1.0, 0.0);
      wei16_delays(params, tau0_us, tp_us);
      append_blocks(p,
                    {{d.tau1, "x", d.tau2, "y", 2 * d.tau3, "y", d.tau2p, "x", d.tau1p},
                     {d.tau1p, "x", d.tau2, "y", 2 * d.tau3p, "y", d.tau2p, "x", d.tau1},
                     {d.tau1, "-x", d.tau2p, "-y", 2 * d.tau3p, "-y", d.tau2, "-x", d.tau1p},
                     {d.tau1p, "-x", d.tau2p, "-y", 2 * d.tau3, "-y", d.tau2, "-x", d.tau1}},
                    tau0_us);
      break;
    }
    case SequenceName::Angle12:
      append_blocks(p, angle12, tau0_us);
      break;
    case SequenceName::Peng24: {
      append_blocks(p, angle12, tau0_us);
      const std::vector<Event> first_half = p.events;
      for (Event e : first_half) {
        if (auto* hp = std::get_if<event::HardPulse>(&e)) {
          hp->phase_deg = normalize_phase(hp->phase_deg + 180.0);
        }
        append_event(p.events, e);
      }
      break;
    }
    case SequenceName::Mrev8:
      append_blocks(p,
                    {{1.0, "-x", 1.0, "y", 2.0, "-y", 1.0, "x", 1.0},
                     {1.0, "x", 1.0, "y", 2.0, "-y", 1.0, "-x", 1.0}},
                    tau0_us);
      break;
  }
  free_evolution_times(p, tp_us);
  return p;
}

PulseProgram reflect_for_reversal(const PulseProgram& p) {
  if (p.stage != Stage::Logical) {
    throw StageError("reflect_for_reversal expects a logical-stage program, got " +
                     std::string(stage_name(p.stage)));
  }
  PulseProgram out = p;
  for (auto& e : out.events) {
    if (auto* hp = std::get_if<event::HardPulse>(&e)) {
      hp->phase_deg = normalize_phase(90.0 - hp->phase_deg);
    }
  }
  return out;
}

std::vector<double> free_evolution_times(const PulseProgram& p, double tp_us) {
  const std::size_t n = p.events.size();
  std::vector<double> free(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (const auto* d = std::get_if<event::Delay>(&p.events[k])) free[k] = d->duration_us;
  }
  if (tp_us <= 0.0) return free;

  auto neighbour_delay = [&](std::size_t k, int dir) -> std::size_t {
    std::size_t j = k;
    for (std::size_t steps = 0; steps < n; ++steps) {
      j = (j + n + static_cast<std::size_t>(dir)) % n;
      if (is_delay(p.events[j])) return j;
      if (is_pulse(p.events[j])) break;
    }
    throw ConstraintError("pulse " + std::to_string(k) + " has no delay to absorb its width");
  };

  for (std::size_t k = 0; k < n; ++k) {
    if (!is_pulse(p.events[k])) continue;
    free[neighbour_delay(k, -1)] -= tp_us / 2.0;
    free[neighbour_delay(k, +1)] -= tp_us / 2.0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    // Tolerate rounding from splitting printed delays into halves.
    if (free[k] < 0.0 && free[k] > -1e-12) free[k] = 0.0;
    if (free[k] < 0.0) {
      throw ConstraintError("delay of " +
                            format_number(std::get<event::Delay>(p.events[k]).duration_us) +
                            " us at event " + std::to_string(k) +
                            " is too short for pulses of width " + format_number(tp_us) + " us");
    }
  }
  return free;
}

void check_experimental_constraints(const PulseProgram& p) {
  std::vector<double> gaps;
  double pending = 0.0;
  double leading = 0.0;
  bool seen_pulse = false;
  for (const auto& e : p.events) {
    if (std::holds_alternative<event::VirtualZ>(e) || std::holds_alternative<event::Transient>(e)) {
      throw ConstraintError("experimental program contains frame or transient events");
    }
    if (const auto* d = std::get_if<event::Delay>(&e)) {
      pending += d->duration_us;
    } else if (const auto* hp = std::get_if<event::HardPulse>(&e)) {
      if (hp->phase_deg != std::round(hp->phase_deg)) {
        throw ConstraintError("pulse phase " + format_number(hp->phase_deg) +
                              " is not on the 1 degree grid");
      }
      if (seen_pulse) {
        gaps.push_back(pending - p.tp_us);
      } else {
        leading = pending;
      }
      seen_pulse = true;
      pending = 0.0;
    }
  }
  if (seen_pulse) gaps.push_back(pending + leading - p.tp_us);
  for (double g : gaps) {
    if (g < kMinExperimentalGapUs - 1e-9) {
      throw ConstraintError("pulse gap of " + format_number(g) + " us is below the " +
                            format_number(kMinExperimentalGapUs) + " us minimum");
    }
  }
}

PulseProgram parse_program(std::string_view text) { return Parser(text).run(); }

std::string print_program(const PulseProgram& p) {
  std::ostringstream out;
  if (needs_header(p)) {
    out << "SEQ";
    if (!p.name.empty()) out << ' ' << p.name;
    out << " tau0=" << format_number(p.tau0_us) << " tp=" << format_number(p.tp_us)
        << " stage=" << stage_name(p.stage);
    if (p.frame_deg != 0.0) out << " frame=" << format_number(p.frame_deg);
    out << '\n';
  }
  if (p.events.empty()) return out.str();

  // Blocks of four pulses (three for the Angle12 family); a delay straddling a block boundary
  // is printed as two halves, which the parser merges back.
  const int pulses_per_block = (p.name == "angle12" || p.name == "peng24") ? 3 : 4;
  out << "P(";
  bool first_item = true;
  int pulses_in_block = 0;
  auto emit = [&](const Event& e) {
    if (!first_item) out << ',';
    print_event(out, e);
    first_item = false;
  };
  for (std::size_t k = 0; k < p.events.size(); ++k) {
    const Event& e = p.events[k];
    if (pulses_in_block == pulses_per_block) {
      const auto* d = std::get_if<event::Delay>(&e);
      if (d && k + 1 < p.events.size()) {
        const double half = d->duration_us / 2.0;
        emit(event::Delay{half});
        out << ")\nP(";
        first_item = true;
        pulses_in_block = 0;
        emit(event::Delay{d->duration_us - half});
        continue;
      }
      if (is_pulse(e)) {
        out << ")\nP(";
        first_item = true;
        pulses_in_block = 0;
      }
    }
    emit(e);
    if (is_pulse(e)) ++pulses_in_block;
  }
  out << ")\n";
  return out.str();
}

PulseProgram read_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open program file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str());
}

void write_program_file(const std::string& path, const PulseProgram& p) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write program file '" + path + "'");
  out << print_program(p);
  if (!out) throw InputError("failed writing program file '" + path + "'");
}

}  // namespace framechange
