#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "corpuskit/bpe.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/metrics.hpp"
#include "corpuskit/pii.hpp"
#include "corpuskit/pipeline.hpp"
#include "corpuskit/quality.hpp"
#include "corpuskit/sampler.hpp"
#include "corpuskit/url_filter.hpp"

namespace py = pybind11;
using namespace corpuskit;

namespace {

Document to_document(const py::dict& d) {
  Document doc;
  doc.id = py::cast<std::string>(d["id"]);
  doc.lang = language(py::cast<std::string>(d["lang"]));
  doc.text = py::cast<std::string>(d["text"]);
  if (d.contains("source")) doc.source = py::cast<std::string>(d["source"]);
  if (d.contains("url") && !d["url"].is_none()) doc.url = py::cast<std::string>(d["url"]);
  return doc;
}

py::dict from_document(const Document& doc) {
  py::dict d;
  d["id"] = doc.id;
  d["lang"] = doc.lang.code;
  d["source"] = doc.source;
  d["text"] = doc.text;
  d["url"] = doc.url ? py::cast(*doc.url) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_corpuskit, m) {
  m.doc() = "Multilingual corpus curation and evaluation toolkit";

  // Translators run newest first, so the subclass goes last.
  py::register_exception<Error>(m, "CorpusError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("normalize_line", &normalize_line, py::arg("line"));
  m.def("chrf_pp", [](const std::string& h, const std::string& r) { return chrf_pp(h, r); }, py::arg("hypothesis"),
        py::arg("reference"));
  m.def("word_edit_distance", [](const std::string& h, const std::string& r) { return word_edit_distance(h, r); },
        py::arg("hypothesis"), py::arg("reference"));
  m.def(
      "per_char_perplexity",
      [](const std::string& text, double lp, std::uint64_t tokens) {
        return per_char_perplexity(ScoredText::from_text(text, lp, tokens));
      },
      py::arg("text"), py::arg("total_log_prob"), py::arg("token_count") = 0);
  m.def("relative_improvement", &relative_improvement, py::arg("ours"), py::arg("baseline"));
  m.def(
      "borda",
      [](const std::map<std::string, std::map<std::string, double>>& scores) {
        BenchmarkTable t;
        for (const auto& [model, row] : scores) {
          for (const auto& [task, v] : row) t.set(model, task, v);
        }
        return borda(t);
      },
      py::arg("scores"));

  m.def(
      "parse_host",
      [](const std::string& url) -> py::object {
        const auto h = parse_host(url);
        if (!h) return py::none();
        py::dict d;
        d["host"] = h->host;
        d["registrable"] = h->registrable;
        d["subdomain_count"] = h->subdomain_count;
        return d;
      },
      py::arg("url"));

  m.def(
      "quality_metrics",
      [](const std::string& text, const std::string& lang) {
        const auto q = score_text(text, lang, StopwordTable{});
        py::dict d;
        d["punct_ratio"] = q.punct_ratio;
        d["upper_ratio"] = q.upper_ratio;
        d["digit_ratio"] = q.digit_ratio;
        d["one_letter_ratio"] = q.one_letter_ratio;
        d["word_count"] = q.word_count;
        d["avg_word_len"] = q.avg_word_len;
        return d;
      },
      py::arg("text"), py::arg("lang") = "en");

  m.def(
      "anonymize",
      [](const std::string& text, std::uint64_t seed) {
        PiiRules rules;
        rules.seed = seed;
        Document doc;
        doc.id = "py";
        doc.lang = language("en");
        doc.text = text;
        const auto r = anonymize_pii(doc, rules);
        std::vector<std::tuple<std::string, std::size_t, std::size_t>> spans;
        for (const auto& s : r.replacements) spans.emplace_back(std::string(to_string(s.kind)), s.begin, s.end);
        return py::make_tuple(r.doc.text, spans);
      },
      py::arg("text"), py::arg("seed") = 0);

  m.def(
      "dedup",
      [](const std::vector<py::dict>& docs, const std::string& mode) {
        std::vector<Document> in;
        for (const auto& d : docs) in.push_back(to_document(d));
        DedupConfig cfg;
        cfg.default_mode = dedup_mode_from_string(mode);
        const auto out = dedup_pipeline(in, cfg);
        std::vector<py::dict> res;
        for (const auto& d : out.docs) res.push_back(from_document(d));
        return res;
      },
      py::arg("docs"), py::arg("mode") = "corpus");

  m.def(
      "compute_budgets",
      [](const std::vector<std::tuple<std::string, std::uint64_t>>& uniques, double cap, std::uint64_t target) {
        std::vector<BudgetInput> in;
        for (const auto& [lang, n] : uniques) in.push_back({lang, n, std::nullopt});
        std::vector<py::dict> out;
        for (const auto& b : compute_budgets(in, cap, target)) {
          py::dict d;
          d["lang"] = b.lang;
          d["unique_tokens"] = b.unique_tokens;
          d["total_tokens"] = b.total_tokens;
          d["ratio"] = b.ratio();
          out.push_back(d);
        }
        return out;
      },
      py::arg("uniques"), py::arg("cap") = 2.5, py::arg("target"));

  m.def(
      "phase_budgets",
      [](std::uint64_t total, std::array<double, 3> fractions) {
        const std::vector<LanguageBudget> one = {{"xx", 1, 1.0, 1, 1, std::nullopt}};
        std::vector<std::uint64_t> out;
        for (const auto& p : build_schedule(one, fractions, total, 0).phases) out.push_back(p.token_budget);
        return out;
      },
      py::arg("total"), py::arg("fractions") = kDefaultPhaseFractions);

  py::class_<BpeVocab>(m, "Tokenizer")
      .def_static(
          "train",
          [](const std::string& text, std::size_t vocab_size, double coverage) {
            return train_bpe_text(text, BpeOptions{vocab_size, coverage});
          },
          py::arg("text"), py::arg("vocab_size") = 4096, py::arg("coverage") = 0.99995)
      .def_static("load", [](const std::string& path) { return BpeVocab::load(path); })
      .def("save", [](const BpeVocab& v, const std::string& path) { v.save(path); })
      .def("encode", [](const BpeVocab& v, const std::string& text) { return v.encode(text); })
      .def("decode",
           [](const BpeVocab& v, const std::vector<TokenId>& ids) { return py::bytes(v.decode(ids)); })
      .def("count", [](const BpeVocab& v, const std::string& text) { return v.count(text); })
      .def_property_readonly("size", &BpeVocab::size)
      .def_property_readonly("base_size", &BpeVocab::base_size);

  m.def(
      "run_pipeline",
      [](const std::string& config, std::optional<std::uint64_t> seed, int jobs) {
        auto c = PipelineConfig::load(config);
        if (seed) c.set_seed(*seed);
        Pipeline p(std::move(c), jobs);
        return p.run_all().to_json().dump();
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("jobs") = 1);
}
