#include "ssmcmc/data_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ssmcmc {

namespace {

void write_comments(std::ostream& os, const std::vector<std::string>& comments) {
  for (const auto& c : comments) {
    os << "# " << c << '\n';
  }
}

}  // namespace

void write_sv_csv(std::ostream& os, const RealPath& x, const RealPath& y,
                  const std::vector<std::string>& header_comments) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("write_sv_csv: length mismatch");
  }
  write_comments(os, header_comments);
  os << "# model=sv\ntime,x,y\n";
  char buf[96];
  for (std::size_t t = 0; t < x.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", t + 1, x[t], y[t]);
    os << buf;
  }
}

void write_hmm_csv(std::ostream& os, const StatePath& x, const SymbolSeq& y,
                   const std::vector<std::string>& header_comments) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("write_hmm_csv: length mismatch");
  }
  write_comments(os, header_comments);
  os << "# model=hmm\ntime,x,y\n";
  for (std::size_t t = 0; t < x.size(); ++t) {
    os << t + 1 << ',' << x[t] + 1 << ',' << dna_symbol(y[t]) << '\n';
  }
}

DataSet read_data_csv(std::istream& is) {
  DataSet ds;
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# model=", 0) == 0) ds.model = line.substr(8);
      continue;
    }
    if (!header_seen) {
      if (line != "time,x,y") {
        throw std::runtime_error("data file: expected header 'time,x,y'");
      }
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string t, x, y;
    if (!std::getline(ss, t, ',') || !std::getline(ss, x, ',') || !std::getline(ss, y)) {
      throw std::runtime_error("data file: malformed row at line " + std::to_string(lineno));
    }
    if (ds.model == "hmm") {
      ds.x_state.push_back(std::atoi(x.c_str()) - 1);
      if (y.size() != 1) {
        throw std::runtime_error("data file: bad symbol at line " + std::to_string(lineno));
      }
      ds.y_symbol.push_back(dna_code(y[0]));
    } else if (ds.model == "sv") {
      ds.x_real.push_back(std::strtod(x.c_str(), nullptr));
      ds.y_real.push_back(std::strtod(y.c_str(), nullptr));
    } else {
      throw std::runtime_error("data file: missing '# model=' line");
    }
  }
  if (!header_seen || ds.size() == 0) {
    throw std::runtime_error("data file: no observations");
  }
  return ds;
}

DataSet read_data_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open data file '" + path + "'");
  }
  return read_data_csv(in);
}

}  // namespace ssmcmc
