#pragma once

#include <istream>
#include <ostream>
#include <sstream>

#include "bqldb/bql/executor.hpp"
#include "bqldb/bql/parser.hpp"
#include "bqldb/cli/render.hpp"
#include "bqldb/cli/session.hpp"

namespace bqldb::cli {

inline void print_diagnostic(std::ostream& out, const std::string& text,
                             const bql::ParseError& e) {
  out << "error: " << e.what() << "\n";
  std::istringstream lines(text);
  std::string line;
  for (std::size_t i = 1; std::getline(lines, line); ++i) {
    if (i == e.pos().line) {
      out << "  " << line << "\n";
      out << "  " << std::string(e.pos().col > 0 ? e.pos().col - 1 : 0, ' ') << "^\n";
      return;
    }
  }
}

// Executes a whole script; stops at the first failing statement. Returns 0
// on success, 1 on a statement error.
inline int run_script_text(Session& session, const std::string& text, std::ostream& out,
                           OutputFormat fmt) {
  std::vector<bql::SpannedStatement> stmts;
  try {
    stmts = bql::parse(text);
  } catch (const bql::ParseError& e) {
    print_diagnostic(out, text, e);
    return 1;
  }
  for (const auto& stmt : stmts) {
    try {
      render_result(out, bql::execute(stmt, session), fmt);
    } catch (const std::exception& e) {
      out << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}

inline int run_script_file(Session& session, const std::string& path, std::ostream& out,
                           OutputFormat fmt) {
  return run_script_text(session, read_file(path), out, fmt);
}

namespace rdetail {

inline std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace rdetail

// Interactive loop: ';'-terminated statements, '.'-prefixed meta-commands.
// Survives all statement errors.
inline int run_repl(Session& session, std::istream& in, std::ostream& out,
                    OutputFormat fmt, bool prompt = true) {
  std::string pending;
  std::string line;
  auto flush_prompt = [&] {
    if (prompt) out << (pending.empty() ? "bqldb> " : "  ...> ") << std::flush;
  };
  flush_prompt();
  while (std::getline(in, line)) {
    if (pending.empty() && !line.empty() && line[0] == '.') {
      auto words = rdetail::split_words(line);
      const std::string& cmd = words[0];
      try {
        if (cmd == ".quit" || cmd == ".exit") {
          return 0;
        } else if (cmd == ".help") {
          out << ".load <file.bql>   run a script\n"
                 ".save [dir]        persist the session workspace\n"
                 ".open <dir>        load a saved workspace\n"
                 ".seed <n>          reset the session seed\n"
                 ".export heatmap <population> <file.csv>\n"
                 ".quit\n";
        } else if (cmd == ".seed") {
          if (words.size() != 2) throw Error(".seed takes one integer");
          session.set_seed(std::stoull(words[1]));
          out << "ok: seed " << words[1] << "\n";
        } else if (cmd == ".load") {
          if (words.size() != 2) throw Error(".load takes a script path");
          run_script_file(session, words[1], out, fmt);
        } else if (cmd == ".save") {
          std::string dir = words.size() > 1 ? words[1] : session.workspace;
          save_session(session, dir);
          out << "ok: saved to " << dir << "\n";
        } else if (cmd == ".open") {
          if (words.size() != 2) throw Error(".open takes a workspace directory");
          session = open_session(words[1]);
          out << "ok: opened " << words[1] << " (" << session.populations.size()
              << " populations)\n";
        } else if (cmd == ".export") {
          if (words.size() != 4 || words[1] != "heatmap")
            throw Error("usage: .export heatmap <population> <file.csv>");
          export_heatmap(session.require(words[2]), words[3]);
          out << "ok: wrote " << words[3] << " and " << words[3] << ".order\n";
        } else {
          throw Error("unknown meta-command '" + cmd + "' (try .help)");
        }
      } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
      }
      flush_prompt();
      continue;
    }

    pending += line;
    pending += '\n';
    // statement complete once a ';' appears outside quotes
    bool complete = false;
    char quote = 0;
    for (char c : pending) {
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '\'' || c == '"') {
        quote = c;
      } else if (c == ';') {
        complete = true;
      }
    }
    if (!complete) {
      flush_prompt();
      continue;
    }
    std::string text;
    text.swap(pending);
    try {
      for (const auto& stmt : bql::parse(text))
        render_result(out, bql::execute(stmt, session), fmt);
    } catch (const bql::ParseError& e) {
      print_diagnostic(out, text, e);
    } catch (const std::exception& e) {
      out << "error: " << e.what() << "\n";
    }
    flush_prompt();
  }
  return 0;
}

}  // namespace bqldb::cli
