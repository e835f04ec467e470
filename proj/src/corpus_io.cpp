#include "corpuskit/corpus_io.hpp"

#include "corpuskit/error.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

using nlohmann::json;

json to_json(const Document& doc) {
  json j;
  j["id"] = doc.id;
  if (doc.url) j["url"] = *doc.url;
  j["lang"] = doc.lang.code;
  j["source"] = doc.source;
  j["text"] = doc.text;
  if (doc.token_count) j["token_count"] = *doc.token_count;
  return j;
}

CorpusReader::CorpusReader(const std::filesystem::path& path, LanguageTag default_lang)
    : path_(path), in_(path, std::ios::binary), default_lang_(std::move(default_lang)) {
  if (!in_) throw IoError("cannot open corpus file " + path.string());
  default_source_ = path.stem().string();
}

std::optional<Document> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (auto doc = parse(line)) return doc;
  }
  return std::nullopt;
}

std::optional<Document> CorpusReader::parse(const std::string& line) {
  auto fail = [&](std::string msg) {
    errors_.push_back({line_no_, std::move(msg)});
    return std::nullopt;
  };
  if (!utf8::is_valid(line)) return fail("malformed UTF-8");

  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    return fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) return fail("record is not a JSON object");

  auto optional_string = [&](const char* key) -> std::optional<std::string> {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };

  try {
    Document doc;
    const auto text = optional_string("text");
    if (!text) return fail("missing required field 'text'");
    doc.text = *text;

    if (auto lang = optional_string("lang")) {
      if (lang->empty()) return fail("field 'lang' is empty");
      doc.lang = language(*lang);
    } else if (!default_lang_.code.empty()) {
      doc.lang = default_lang_;
    } else {
      return fail("missing required field 'lang'");
    }

    doc.source = optional_string("source").value_or(default_source_);
    doc.url = optional_string("url");
    if (auto id = optional_string("id")) {
      doc.id = *id;
    } else {
      doc.id = doc.source + ":" + std::to_string(line_no_);
    }
    if (const auto it = j.find("token_count"); it != j.end() && !it->is_null()) {
      if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
        return fail("field 'token_count' must be a non-negative integer");
      }
      doc.token_count = it->get<std::uint64_t>();
    }
    return doc;
  } catch (const ValidationError& e) {
    return fail(e.what());
  }
}

ReadResult read_corpus(const std::filesystem::path& path, LanguageTag default_lang) {
  CorpusReader reader(path, std::move(default_lang));
  ReadResult result;
  while (auto doc = reader.next()) result.docs.push_back(std::move(*doc));
  result.errors = reader.errors();
  return result;
}

void CorpusWriter::write(const Document& doc) {
  out_.stream() << to_json(doc).dump() << '\n';
  if (!out_.stream()) throw IoError("write failed after " + std::to_string(count_) + " documents");
  ++count_;
}

std::size_t write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path) {
  CorpusWriter writer(path);
  for (const auto& d : docs) writer.write(d);
  try {
    writer.commit();
  } catch (const IoError& e) {
    throw IoError(std::string(e.what()) + " (" + std::to_string(writer.count()) + " of " +
                  std::to_string(docs.size()) + " documents written before failure)");
  }
  return writer.count();
}

}  // namespace corpuskit
