#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "seqfluct/align.hpp"
#include "seqfluct/cli.hpp"
#include "seqfluct/error.hpp"
#include "seqfluct/genmodels.hpp"
#include "seqfluct/transforms.hpp"

namespace py = pybind11;
using namespace seqfluct;

namespace {

ScoringScheme scheme_for(const AlphabetPtr& alphabet, const std::optional<std::vector<std::vector<double>>>& table,
                         double gap_price) {
  if (!table) {
    const ScoringScheme lcs = make_lcs_scheme(*alphabet);
    return ScoringScheme(alphabet->size(), lcs.table(), gap_price);
  }
  std::vector<double> flat;
  for (const auto& row : *table) {
    if (row.size() != table->size()) throw Error(ErrorKind::dimension, "score table must be square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return ScoringScheme(table->size(), std::move(flat), gap_price);
}

py::dict blocks_dict(const BlockStats& b) {
  py::dict d;
  d["b1"] = b.b1;
  d["b2"] = b.b2;
  d["b3"] = b.b3;
  d["r"] = b.r;
  return d;
}

}  // namespace

PYBIND11_MODULE(_seqfluct, m) {
  m.doc() = "Optimal alignment scores of random sequence pairs: scoring, models, transformations";

  static py::exception<Error> error(m, "SeqfluctError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object inst = exc(e.what());
      inst.attr("kind") = to_string(e.kind());
      inst.attr("exit_code") = exit_code(e.kind());
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def(
      "score",
      [](const std::string& x, const std::string& y, const std::string& alphabet,
         std::optional<std::vector<std::vector<double>>> table, double gap_price) {
        const auto a = make_alphabet(alphabet);
        return optimal_score(Sequence::parse(a, x), Sequence::parse(a, y), scheme_for(a, table, gap_price)).value;
      },
      py::arg("x"), py::arg("y"), py::arg("alphabet") = "01", py::arg("table") = py::none(),
      py::arg("gap_price") = 0.0, "Optimal alignment score; identity table and zero gap price give the LCS length.");

  m.def(
      "brute_force_score",
      [](const std::string& x, const std::string& y, const std::string& alphabet,
         std::optional<std::vector<std::vector<double>>> table, double gap_price) {
        const auto a = make_alphabet(alphabet);
        return brute_force_score(Sequence::parse(a, x), Sequence::parse(a, y), scheme_for(a, table, gap_price)).value;
      },
      py::arg("x"), py::arg("y"), py::arg("alphabet") = "01", py::arg("table") = py::none(),
      py::arg("gap_price") = 0.0, "Score by enumerating every alignment (length <= 12).");

  m.def(
      "lcs_length",
      [](const std::string& x, const std::string& y, const std::string& alphabet) {
        const auto a = make_alphabet(alphabet);
        return lcs_length(Sequence::parse(a, x), Sequence::parse(a, y));
      },
      py::arg("x"), py::arg("y"), py::arg("alphabet") = "01");

  m.def(
      "block_stats", [](const std::string& x, int l) { return blocks_dict(block_stats(Sequence::parse(binary_alphabet(), x), l)); },
      py::arg("x"), py::arg("l"), "Counts of blocks of length l-1, l, l+1 and the trailing run r.");

  m.def(
      "tur",
      [](const std::string& x, int l) {
        const Sequence s = Sequence::parse(binary_alphabet(), x);
        const UVStats uv = uv_from_blocks(block_stats(s, l), static_cast<std::int64_t>(s.size()), l);
        return py::make_tuple(uv.t(), uv.u, uv.r());
      },
      py::arg("x"), py::arg("l"), "(t, u, r) of a block-model string.");

  m.def(
      "tur_pmf",
      [](std::int64_t t, std::int64_t u, std::int64_t r, int l, double q1, double q2, double q3, std::size_t n) {
        return tur_pmf(t, u, r, BlockModelParams(l, q1, q2, q3), n);
      },
      py::arg("t"), py::arg("u"), py::arg("r"), py::arg("l"), py::arg("q1"), py::arg("q2"), py::arg("q3"), py::arg("n"));

  m.def(
      "block_move_outcomes",
      [](const std::string& x, const std::string& y, int l) {
        const auto a = binary_alphabet();
        const OutcomeSet set = outcomes(SequencePair(Sequence::parse(a, x), Sequence::parse(a, y)), make_block_transform(l));
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& item : set.items) out.emplace_back(item.z.x.str(), item.z.y.str(), item.prob);
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("l"), "Every outcome of the block move with its probability.");

  m.def(
      "letter_swap_outcomes",
      [](const std::string& x, const std::string& y, const std::string& alphabet, char a, char b) {
        const auto al = make_alphabet(alphabet);
        const OutcomeSet set = outcomes(SequencePair(Sequence::parse(al, x), Sequence::parse(al, y)),
                                        make_letter_swap(al->index(a), al->index(b)));
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& item : set.items) out.emplace_back(item.z.x.str(), item.z.y.str(), item.prob);
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("alphabet"), py::arg("a"), py::arg("b"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a subcommand in-process; returns (exit_code, stdout, stderr).");

  m.def("config_fingerprint", &config_fingerprint, py::arg("canonical"));
}
