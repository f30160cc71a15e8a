#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sceneforge/corpus.hpp"
#include "sceneforge/scene_template.hpp"

// Rule-based language analysis: tokenizer, noun-phrase chunker with head
// identification, physical-object filter, coreference collapsing and
// surface-pattern spatial relation extraction.
namespace sceneforge {

struct Lexicon {
  std::set<std::string> physical;
  std::set<std::string> adjectives;
  std::map<std::string, std::string> compounds;  // "round table" -> "RoundTable"
  std::map<std::string, int> numerals;

  static Lexicon defaults() {
    Lexicon lex;
    lex.physical = {
        "armchair", "basket",  "bed",      "bench",      "bin",       "blanket",   "book",     "bookcase",
        "bookshelf", "bottle", "bowl",     "box",        "bureau",    "cabinet",   "candle",   "chair",
        "clock",    "computer", "couch",   "cup",        "cupboard",  "curtain",   "cushion",  "desk",
        "dish",     "display",  "door",    "dresser",    "fern",      "flower",    "frame",    "fruit",
        "glass",    "guitar",   "keyboard", "lamp",      "lantern",   "laptop",    "light",    "mirror",
        "monitor",  "mouse",    "mug",     "nightstand", "notebook",  "notepad",   "novel",    "ottoman",
        "pad",      "painting", "paper",   "pen",        "pencil",    "phone",     "piano",    "picture",
        "pillow",   "plant",    "plate",   "printer",    "radio",     "rug",       "screen",   "seat",
        "settee",   "shelf",    "sofa",    "speaker",    "stool",     "table",     "television", "toy",
        "tv",       "urn",      "vase",    "window",     "workstation",
    };
    lex.adjectives = {
        "antique", "beige",  "big",    "black",  "blue",   "brown",   "ceramic", "dark",  "glass",
        "gray",    "green",  "grey",   "large",  "leather", "light",  "little",  "long",  "metal",
        "modern",  "new",    "old",    "orange", "pink",   "plastic", "purple",  "rectangular",
        "red",     "round",  "short",  "silver", "small",  "square",  "tall",    "tiny",  "white",
        "wide",    "wooden", "yellow", "l-shaped", "nice", "pretty",  "cozy",
    };
    lex.compounds = {
        {"round table", "RoundTable"}, {"coffee table", "CoffeeTable"}, {"dining table", "DiningTable"},
        {"table lamp", "TableLamp"},   {"desk lamp", "DeskLamp"},       {"office chair", "OfficeChair"},
    };
    lex.numerals = {{"one", 1}, {"two", 2},   {"three", 3}, {"four", 4}, {"five", 5},
                    {"six", 6}, {"seven", 7}, {"eight", 8}, {"nine", 9}, {"ten", 10}};
    return lex;
  }

  // Every single-token category label of the database counts as physical.
  void add_database(const ModelDatabase& db) {
    for (const auto& [category, ids] : db.category_index()) {
      std::string lower;
      for (char c : category) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (lower.find(' ') == std::string::npos) physical.insert(lower);
    }
  }

  void merge(const Lexicon& other) {
    physical.insert(other.physical.begin(), other.physical.end());
    adjectives.insert(other.adjectives.begin(), other.adjectives.end());
    for (const auto& kv : other.compounds) compounds.insert(kv);
    for (const auto& kv : other.numerals) numerals.insert(kv);
  }
};

inline json lexicon_to_json(const Lexicon& lex) {
  return {{"physical", lex.physical},
          {"adjectives", lex.adjectives},
          {"compounds", lex.compounds},
          {"numerals", lex.numerals}};
}

inline Lexicon lexicon_from_json(const json& j, const std::string& origin = "lexicon.json") {
  if (!j.is_object()) throw SchemaError(origin + ": lexicon must be an object");
  Lexicon lex;
  auto list = [&](const char* key) {
    if (!j.contains(key)) return std::set<std::string>{};
    auto v = detail::field<std::vector<std::string>>(j, key, origin);
    return std::set<std::string>(v.begin(), v.end());
  };
  lex.physical = list("physical");
  lex.adjectives = list("adjectives");
  if (j.contains("compounds")) lex.compounds = detail::field<std::map<std::string, std::string>>(j, "compounds", origin);
  if (j.contains("numerals")) lex.numerals = detail::field<std::map<std::string, int>>(j, "numerals", origin);
  return lex;
}

inline Lexicon load_lexicon(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return lexicon_from_json(detail::parse_json(text, path.string()), path.string());
}

// ---------------------------------------------------------------------------
// Closed-class vocabulary

namespace words {

inline const std::set<std::string>& indefinite_determiners() {
  static const std::set<std::string> s{"a", "an", "some", "another", "any", "each", "every"};
  return s;
}

inline const std::set<std::string>& definite_determiners() {
  static const std::set<std::string> s{"the", "this", "that", "these", "those", "its",
                                       "his", "her",  "their", "my",   "your",  "our"};
  return s;
}

inline const std::set<std::string>& pronouns() {
  static const std::set<std::string> s{"it", "this", "that"};
  return s;
}

// Tokens that may sit between a subject and its relation phrase.
inline const std::set<std::string>& linking() {
  static const std::set<std::string> s{"is",      "are",    "was",    "were",   "be",      "been",   "sits",
                                       "sit",     "sitting", "stands", "stand",  "standing", "placed", "located",
                                       "lies",    "lying",  "rests",  "resting", "also",   "put",     "set",
                                       "there",   "which",  "that"};
  return s;
}

// Function words and verbs; never part of a noun phrase.
inline const std::set<std::string>& closed_class() {
  static const std::set<std::string> s{
      "there",  "here",   "is",     "are",    "was",     "were",   "be",     "been",  "being",  "has",
      "have",   "had",    "with",   "and",    "or",      "but",    "of",     "in",    "on",     "at",
      "to",     "by",     "for",    "from",   "up",      "down",   "into",   "onto",  "over",   "under",
      "near",   "behind", "next",   "top",    "left",    "right",  "front",  "against", "beside", "between",
      "above",  "below",  "inside", "i",      "you",     "we",     "they",   "he",    "she",    "me",
      "see",    "can",    "also",   "very",   "just",    "which",  "who",    "where", "sits",   "sit",
      "sitting", "stands", "stand", "standing", "placed", "located", "lies",  "lying", "rests",  "resting",
      "contains", "holds", "not",   "no",     "as",      "so",     "then",   "than",  "too",    "it",
      "them",   "put",    "set",    "its",    "his",     "her",    "their",  "my",    "your",   "our",
      "what",   "looks",  "like",   "seems",  "around",  "along",  "across", "toward", "towards", "facing",
      "s",      "'s",     "an",     "a",      "the",     "some",   "another", "any",  "each",   "every",
      "these",  "those",  "this",   "that",   "sits",    "lots",   "lot",    "many",  "few",    "several",
      "other",  "both",   "all",    "one",
  };
  return s;
}

inline const std::set<std::string>& room_words() {
  static const std::set<std::string> s{"room", "corner", "wall", "middle", "center", "centre", "floor", "side"};
  return s;
}

}  // namespace words

// ---------------------------------------------------------------------------
// Types

struct Token {
  std::string text;
  std::size_t index = 0;
  std::size_t sentence_index = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

using Sentence = std::vector<Token>;

struct NounChunk {
  std::size_t sentence_index = 0;
  std::size_t begin = 0;  // token index of the first span token
  std::size_t end = 0;    // one past the last span token
  std::size_t head_index = 0;  // offset of the head's last token within the span
  std::string head;            // head lemma, or the compound key when one matched
  std::optional<std::string> compound_category;
  std::vector<std::string> modifiers;
  std::optional<std::string> determiner;
  std::optional<std::string> numeral;
  int count = 1;
  bool pronoun = false;
  std::vector<std::string> tokens;  // span text

  bool definite() const { return determiner && words::definite_determiners().count(*determiner) > 0; }

  friend bool operator==(const NounChunk&, const NounChunk&) = default;
};

struct Mention {
  int mention_id = 0;
  std::string head_lemma;
  std::vector<std::string> attributes;
  NounChunk chunk;
  int coref_id = -1;  // -1 for an unresolved pronoun
  int count = 1;

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct ParsedUtterance {
  std::vector<Sentence> sentences;
  std::vector<Mention> mentions;  // one per coreference cluster, ordered by cluster id
  std::vector<SpatialRelation> relations;

  bool empty() const { return sentences.empty(); }
  const Mention* cluster(int coref_id) const {
    for (const auto& m : mentions)
      if (m.coref_id == coref_id) return &m;
    return nullptr;
  }

  friend bool operator==(const ParsedUtterance&, const ParsedUtterance&) = default;
};

// ---------------------------------------------------------------------------
// Tokenizer

inline bool is_punctuation(std::string_view tok) {
  return tok.size() == 1 && std::ispunct(static_cast<unsigned char>(tok[0])) && tok[0] != '\'';
}

inline bool is_sentence_end(std::string_view tok) { return tok == "." || tok == "!" || tok == "?"; }

inline std::vector<Sentence> tokenize_and_split(std::string_view text) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string word;
  auto push = [&](std::string t) {
    Token tok{std::move(t), current.size(), sentences.size()};
    const bool end = is_sentence_end(tok.text);
    current.push_back(std::move(tok));
    if (end) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  };
  auto flush = [&] {
    if (!word.empty()) {
      push(word);
      word.clear();
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c) && c != '\'' && c != '-') {
      flush();
      push(std::string(1, static_cast<char>(c)));
    } else if (c == '-' && word.empty()) {
      push("-");
    } else {
      word += static_cast<char>(std::tolower(c));
    }
  }
  flush();
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

// Plural folding against the physical lexicon; unknown words pass through.
inline std::string lemmatize(const std::string& word, const Lexicon& lex) {
  if (lex.physical.count(word)) return word;
  auto known = [&](const std::string& w) { return lex.physical.count(w) > 0; };
  const auto n = word.size();
  if (n > 3 && word.compare(n - 3, 3, "ies") == 0 && known(word.substr(0, n - 3) + "y"))
    return word.substr(0, n - 3) + "y";
  if (n > 2 && word.compare(n - 2, 2, "es") == 0 && known(word.substr(0, n - 2))) return word.substr(0, n - 2);
  if (n > 1 && word.back() == 's' && known(word.substr(0, n - 1))) return word.substr(0, n - 1);
  return word;
}

// ---------------------------------------------------------------------------
// Relation phrases

struct RelationPhrase {
  std::vector<std::string> tokens;
  RelationKind kind;
};

inline const std::vector<RelationPhrase>& relation_phrases() {
  // Longest first so "on top of" wins over "on".
  static const std::vector<RelationPhrase> table = [] {
    std::vector<RelationPhrase> t{
        {{"on", "top", "of"}, RelationKind::on},
        {{"to", "the", "left", "of"}, RelationKind::left_of},
        {{"to", "the", "right", "of"}, RelationKind::right_of},
        {{"in", "front", "of"}, RelationKind::in_front_of},
        {{"in", "the", "corner"}, RelationKind::in_corner},
        {{"in", "the", "middle"}, RelationKind::in_center},
        {{"in", "the", "center"}, RelationKind::in_center},
        {{"next", "to"}, RelationKind::next_to},
        {{"on"}, RelationKind::on},
        {{"under"}, RelationKind::under},
        {{"behind"}, RelationKind::behind},
        {{"near"}, RelationKind::near},
        {{"inside"}, RelationKind::inside},
    };
    std::stable_sort(t.begin(), t.end(),
                     [](const auto& a, const auto& b) { return a.tokens.size() > b.tokens.size(); });
    return t;
  }();
  return table;
}

struct PhraseMatch {
  std::size_t begin = 0;
  std::size_t end = 0;
  RelationKind kind = RelationKind::on;
};

// Left-to-right longest-match scan for relation phrases.
inline std::vector<PhraseMatch> match_relation_phrases(const Sentence& sentence) {
  std::vector<PhraseMatch> out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    bool matched = false;
    for (const auto& p : relation_phrases()) {
      if (i + p.tokens.size() > sentence.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < p.tokens.size() && ok; ++k) ok = sentence[i + k].text == p.tokens[k];
      if (ok) {
        out.push_back({i, i + p.tokens.size(), p.kind});
        i += p.tokens.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chunker

enum class Tag { determiner, numeral, adjective, noun, other };

inline Tag tag_of(const std::string& w, const Lexicon& lex) {
  if (words::definite_determiners().count(w) || words::indefinite_determiners().count(w)) return Tag::determiner;
  if (lex.numerals.count(w)) return Tag::numeral;
  if (!w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); }))
    return Tag::numeral;
  if (lex.adjectives.count(w) && !lex.physical.count(w)) return Tag::adjective;
  if (words::closed_class().count(w) || is_punctuation(w)) return Tag::other;
  return Tag::noun;  // out-of-lexicon default
}

inline int numeral_value(const std::string& w, const Lexicon& lex) {
  if (auto it = lex.numerals.find(w); it != lex.numerals.end()) return it->second;
  try {
    return std::max(1, std::stoi(w));
  } catch (...) {
    return 1;
  }
}

// Maximal spans of (determiner? numeral? (adjective|noun)* noun), plus
// standalone pronouns. Relation-phrase tokens act as boundaries.
inline std::vector<NounChunk> chunk_noun_phrases(const Sentence& sentence, const Lexicon& lex) {
  std::vector<bool> blocked(sentence.size(), false);
  for (const auto& m : match_relation_phrases(sentence))
    for (std::size_t k = m.begin; k < m.end; ++k) blocked[k] = true;

  auto tag_at = [&](std::size_t k) { return blocked[k] ? Tag::other : tag_of(sentence[k].text, lex); };

  std::vector<NounChunk> chunks;
  std::size_t i = 0;
  while (i < sentence.size()) {
    if (blocked[i]) {
      ++i;
      continue;
    }
    const std::string& w = sentence[i].text;
    const bool next_is_nominal = i + 1 < sentence.size() && !blocked[i + 1] &&
                                 (tag_at(i + 1) == Tag::noun || tag_at(i + 1) == Tag::adjective ||
                                  tag_at(i + 1) == Tag::numeral);
    if (words::pronouns().count(w) && !next_is_nominal) {
      NounChunk c;
      c.sentence_index = sentence[i].sentence_index;
      c.begin = i;
      c.end = i + 1;
      c.head = w;
      c.pronoun = true;
      c.tokens = {w};
      chunks.push_back(std::move(c));
      ++i;
      continue;
    }

    std::size_t j = i;
    std::optional<std::string> det;
    std::optional<std::string> numeral;
    int count = 1;
    if (tag_at(j) == Tag::determiner) det = sentence[j++].text;
    if (j < sentence.size() && tag_at(j) == Tag::numeral) {
      numeral = sentence[j].text;
      count = numeral_value(sentence[j++].text, lex);
    }
    const std::size_t body = j;
    std::optional<std::size_t> last_noun;
    while (j < sentence.size() && (tag_at(j) == Tag::adjective || tag_at(j) == Tag::noun)) {
      if (tag_at(j) == Tag::noun) last_noun = j;
      ++j;
    }
    if (!last_noun) {
      i = std::max(i + 1, body);
      continue;
    }

    NounChunk c;
    c.sentence_index = sentence[i].sentence_index;
    c.begin = i;
    c.end = *last_noun + 1;
    c.head_index = *last_noun - i;
    c.determiner = det;
    c.numeral = numeral;
    c.count = count;
    for (std::size_t k = c.begin; k < c.end; ++k) c.tokens.push_back(sentence[k].text);

    // Compound heads: longest suffix of the body found in the compound table.
    std::size_t head_begin = *last_noun;
    c.head = lemmatize(sentence[*last_noun].text, lex);
    for (std::size_t len = std::min<std::size_t>(3, c.end - body); len >= 2; --len) {
      std::string key;
      for (std::size_t k = c.end - len; k < c.end; ++k) {
        if (!key.empty()) key += ' ';
        key += k + 1 == c.end ? lemmatize(sentence[k].text, lex) : sentence[k].text;
      }
      if (auto it = lex.compounds.find(key); it != lex.compounds.end()) {
        c.head = key;
        c.compound_category = it->second;
        head_begin = c.end - len;
        break;
      }
    }
    for (std::size_t k = body; k < head_begin; ++k) c.modifiers.push_back(sentence[k].text);
    chunks.push_back(std::move(c));
    i = chunks.back().end;
  }
  return chunks;
}

// ---------------------------------------------------------------------------
// Physical filter

inline bool is_room_chunk(const NounChunk& c) { return !c.pronoun && words::room_words().count(c.head) > 0; }

inline bool is_physical_chunk(const NounChunk& c, const Lexicon& lex) {
  if (c.pronoun) return true;
  if (c.compound_category) return true;
  return lex.physical.count(c.head) > 0 && !words::room_words().count(c.head);
}

// Keeps object mentions and pronouns. Room words ("the corner of the room")
// are left for relation extraction.
inline std::vector<NounChunk> filter_physical(const std::vector<NounChunk>& chunks, const Lexicon& lex) {
  std::vector<NounChunk> out;
  for (const auto& c : chunks)
    if (is_physical_chunk(c, lex)) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// Coreference

// Mentions arrive in document order. Definite mentions join the most recent
// earlier mention with the same head; pronouns join the most recent mention;
// everything else opens a cluster. Pronouns with no antecedent stay at -1.
inline std::vector<Mention> resolve_coreference(std::vector<Mention> mentions) {
  int next_cluster = 0;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    auto& m = mentions[i];
    m.coref_id = -1;
    if (m.chunk.pronoun) {
      for (std::size_t k = i; k-- > 0;) {
        if (mentions[k].coref_id >= 0) {
          m.coref_id = mentions[k].coref_id;
          break;
        }
      }
      continue;
    }
    if (m.chunk.definite()) {
      for (std::size_t k = i; k-- > 0;) {
        if (mentions[k].coref_id >= 0 && !mentions[k].chunk.pronoun && mentions[k].head_lemma == m.head_lemma) {
          m.coref_id = mentions[k].coref_id;
          break;
        }
      }
    }
    if (m.coref_id < 0) m.coref_id = next_cluster++;
  }
  return mentions;
}

// ---------------------------------------------------------------------------
// Relation extraction

namespace detail {

enum class ElementType { chunk, room, relation, link, other };

struct Element {
  ElementType type = ElementType::other;
  int cluster = -1;  // chunk elements: coreference cluster, -1 if none
  RelationKind kind = RelationKind::on;
  std::size_t begin = 0;
  std::string text;
};

}  // namespace detail

// Surface patterns over one sentence:
//   SUBJ link* REL OBJ           "a lamp is on the desk"
//   REL OBJ link* SUBJ           "on the table is a cup"
//   SUBJ link* REL-ROOM          "a lamp in the corner"
//   REL-ROOM (of the room)? link* SUBJ   "in the middle is a table"
// `clusters` maps each chunk's begin token to its coreference cluster.
inline std::vector<SpatialRelation> extract_relations(const Sentence& sentence, const std::vector<NounChunk>& chunks,
                                                      const std::map<std::size_t, int>& clusters) {
  using detail::Element;
  using detail::ElementType;
  std::vector<Element> elems;
  const auto phrases = match_relation_phrases(sentence);
  std::size_t i = 0, pi = 0, ci = 0;
  while (i < sentence.size()) {
    while (pi < phrases.size() && phrases[pi].begin < i) ++pi;
    while (ci < chunks.size() && chunks[ci].begin < i) ++ci;
    if (pi < phrases.size() && phrases[pi].begin == i) {
      elems.push_back({ElementType::relation, -1, phrases[pi].kind, i, {}});
      i = phrases[pi].end;
    } else if (ci < chunks.size() && chunks[ci].begin == i) {
      const auto& c = chunks[ci];
      if (is_room_chunk(c)) {
        elems.push_back({ElementType::room, -1, RelationKind::on, i, c.head});
      } else {
        auto it = clusters.find(c.begin);
        elems.push_back({ElementType::chunk, it == clusters.end() ? -1 : it->second, RelationKind::on, i, c.head});
      }
      i = c.end;
    } else {
      const auto& w = sentence[i].text;
      elems.push_back({words::linking().count(w) ? ElementType::link : ElementType::other, -1, RelationKind::on, i, w});
      ++i;
    }
  }

  auto object_chunk = [&](std::size_t k) { return k < elems.size() && elems[k].type == ElementType::chunk && elems[k].cluster >= 0; };
  // Nearest subject to the left, across linking words only.
  auto subject_before = [&](std::size_t r) -> std::optional<int> {
    std::size_t k = r;
    while (k-- > 0) {
      if (elems[k].type == ElementType::link) continue;
      if (object_chunk(k)) return elems[k].cluster;
      return std::nullopt;
    }
    return std::nullopt;
  };
  auto subject_after = [&](std::size_t k) -> std::optional<int> {
    while (k < elems.size() && elems[k].type == ElementType::link) ++k;
    if (object_chunk(k)) return elems[k].cluster;
    return std::nullopt;
  };

  std::vector<SpatialRelation> out;
  auto emit = [&](RelationKind kind, int subj, std::optional<int> obj) {
    if (obj && *obj == subj) return;
    SpatialRelation r{kind, subj, obj};
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  };

  for (std::size_t r = 0; r < elems.size(); ++r) {
    if (elems[r].type != ElementType::relation) continue;
    const RelationKind kind = elems[r].kind;
    if (is_room_relation(kind)) {
      if (auto s = subject_before(r)) {
        emit(kind, *s, std::nullopt);
        continue;
      }
      std::size_t k = r + 1;
      if (k + 1 < elems.size() && elems[k].type == ElementType::other && elems[k].text == "of" &&
          elems[k + 1].type == ElementType::room)
        k += 2;
      if (auto s = subject_after(k)) emit(kind, *s, std::nullopt);
      continue;
    }
    const std::size_t o = r + 1;
    if (o >= elems.size()) continue;
    std::optional<int> target;
    if (elems[o].type == ElementType::room) {
      target = std::nullopt;
    } else if (object_chunk(o)) {
      target = elems[o].cluster;
    } else {
      continue;
    }
    if (auto s = subject_before(r)) {
      emit(kind, *s, target);
    } else if (auto s2 = subject_after(o + 1)) {
      emit(kind, *s2, target);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full parse

inline ParsedUtterance parse(std::string_view text, const Lexicon& lex) {
  ParsedUtterance out;
  out.sentences = tokenize_and_split(text);

  // Mentions in document order, remembering which sentence chunk each came from.
  std::vector<Mention> mentions;
  std::vector<std::vector<NounChunk>> all_chunks;
  for (const auto& sentence : out.sentences) {
    all_chunks.push_back(chunk_noun_phrases(sentence, lex));
    for (auto& c : filter_physical(all_chunks.back(), lex)) {
      Mention m;
      m.mention_id = static_cast<int>(mentions.size());
      m.head_lemma = c.head;
      m.attributes = c.modifiers;
      m.count = c.count;
      m.chunk = std::move(c);
      mentions.push_back(std::move(m));
    }
  }
  mentions = resolve_coreference(std::move(mentions));

  std::vector<std::map<std::size_t, int>> clusters_by_sentence(out.sentences.size());
  for (const auto& m : mentions)
    if (m.coref_id >= 0) clusters_by_sentence[m.chunk.sentence_index][m.chunk.begin] = m.coref_id;

  // One representative per cluster: the first mention, with merged attributes.
  for (const auto& m : mentions) {
    if (m.coref_id < 0) continue;
    auto it = std::find_if(out.mentions.begin(), out.mentions.end(),
                           [&](const Mention& r) { return r.coref_id == m.coref_id; });
    if (it == out.mentions.end()) {
      out.mentions.push_back(m);
      continue;
    }
    for (const auto& a : m.attributes)
      if (std::find(it->attributes.begin(), it->attributes.end(), a) == it->attributes.end())
        it->attributes.push_back(a);
    it->count = std::max(it->count, m.count);
  }

  for (std::size_t s = 0; s < out.sentences.size(); ++s) {
    for (const auto& r : extract_relations(out.sentences[s], all_chunks[s], clusters_by_sentence[s]))
      if (std::find(out.relations.begin(), out.relations.end(), r) == out.relations.end()) out.relations.push_back(r);
  }
  return out;
}

}  // namespace sceneforge
