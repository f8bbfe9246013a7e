#include "emulate/page_reader.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace emulate {

namespace {

constexpr const char* kPagesKind = "pages";

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool iequals_prefix(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != prefix[i]) return false;
  }
  return true;
}

std::size_t ifind(std::string_view text, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= text.size(); ++i) {
    if (iequals_prefix(text, i, needle)) return i;
  }
  return std::string_view::npos;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes the entity starting at text[pos] == '&'. Returns characters consumed
// (0 when this is not a recognised entity).
std::size_t decode_entity(std::string_view text, std::size_t pos, std::string& out) {
  auto semi = text.find(';', pos);
  if (semi == std::string_view::npos || semi - pos > 10) return 0;
  auto name = text.substr(pos + 1, semi - pos - 1);
  if (name.empty()) return 0;
  if (name[0] == '#') {
    unsigned long cp = 0;
    try {
      if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
        cp = std::stoul(std::string(name.substr(2)), nullptr, 16);
      else
        cp = std::stoul(std::string(name.substr(1)), nullptr, 10);
    } catch (...) {
      return 0;
    }
    if (cp == 0xA0) cp = ' ';
    append_utf8(out, cp);
    return semi - pos + 1;
  }
  static const std::array<std::pair<std::string_view, unsigned long>, 18> kNamed{{
      {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}, {"nbsp", ' '},
      {"mdash", 0x2014}, {"ndash", 0x2013}, {"hellip", 0x2026}, {"lsquo", 0x2018}, {"rsquo", 0x2019},
      {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"copy", 0xA9}, {"reg", 0xAE}, {"deg", 0xB0},
      {"middot", 0xB7}, {"times", 0xD7},
  }};
  for (const auto& [n, cp] : kNamed) {
    if (name == n) {
      append_utf8(out, cp);
      return semi - pos + 1;
    }
  }
  return 0;
}

// Elements whose whole subtree is dropped.
bool is_skipped_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 15> kSkip{
      "script", "style", "noscript", "template", "svg", "iframe", "head", "nav",
      "header", "footer", "aside", "form", "button", "select", "object"};
  return std::find(kSkip.begin(), kSkip.end(), tag) != kSkip.end();
}

// Raw-text elements: their content is not markup, so only the literal close tag ends them.
bool is_raw_text_element(std::string_view tag) {
  return tag == "script" || tag == "style" || tag == "noscript" || tag == "template";
}

bool is_block_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 30> kBlock{
      "p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "table",
      "section", "article", "blockquote", "pre", "dd", "dt", "dl", "main", "figure",
      "figcaption", "hr", "body", "html", "address", "caption", "title"};
  return std::find(kBlock.begin(), kBlock.end(), tag) != kBlock.end();
}

constexpr char kBreak = '\x01';

struct Tag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::size_t end = 0;  // index one past '>'
};

// Parses the tag at text[pos] == '<'. Returns nullopt when it is not a tag.
std::optional<Tag> parse_tag(std::string_view text, std::size_t pos) {
  Tag tag;
  std::size_t i = pos + 1;
  if (i < text.size() && text[i] == '/') {
    tag.closing = true;
    ++i;
  }
  std::size_t name_start = i;
  while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '-' || text[i] == ':'))
    ++i;
  if (i == name_start) return std::nullopt;
  tag.name = to_lower_ascii(text.substr(name_start, i - name_start));
  char quote = 0;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      tag.self_closing = i > pos && text[i - 1] == '/';
      tag.end = i + 1;
      return tag;
    }
  }
  tag.end = text.size();
  return tag;
}

// Index just past the element that was opened by `open` (matching nested tags
// with the same name), or end of input.
std::size_t skip_element(std::string_view text, const Tag& open) {
  if (is_raw_text_element(open.name)) {
    auto close = ifind(text, "</" + open.name, open.end);
    if (close == std::string_view::npos) return text.size();
    auto gt = text.find('>', close);
    return gt == std::string_view::npos ? text.size() : gt + 1;
  }
  int depth = 1;
  std::size_t i = open.end;
  while (i < text.size()) {
    auto lt = text.find('<', i);
    if (lt == std::string_view::npos) return text.size();
    auto tag = parse_tag(text, lt);
    if (!tag) {
      i = lt + 1;
      continue;
    }
    if (tag->name == open.name && !tag->self_closing) {
      depth += tag->closing ? -1 : 1;
      if (depth == 0) return tag->end;
    } else if (!tag->closing && is_raw_text_element(tag->name)) {
      i = skip_element(text, *tag);
      continue;
    }
    i = tag->end;
  }
  return text.size();
}

// Splits on kBreak / blank lines, collapses inner whitespace, joins paragraphs
// with a blank line.
std::string normalize_paragraphs(std::string_view text, bool blank_line_breaks) {
  std::vector<std::string> paragraphs;
  std::string current;
  bool pending_space = false;
  int newlines = 0;
  auto flush = [&] {
    if (!current.empty()) paragraphs.push_back(std::move(current));
    current.clear();
    pending_space = false;
  };
  for (char c : text) {
    if (c == kBreak) {
      flush();
      newlines = 0;
      continue;
    }
    if (is_ws(c)) {
      if (c == '\n' && blank_line_breaks) {
        if (++newlines >= 2) flush();
      }
      if (!current.empty()) pending_space = true;
      continue;
    }
    newlines = 0;
    if (pending_space) current += ' ';
    pending_space = false;
    current += c;
  }
  flush();
  std::string out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (i) out += "\n\n";
    out += paragraphs[i];
  }
  return out;
}

std::string strip_html(std::string_view html) {
  std::string out;
  out.reserve(html.size() / 2);
  std::size_t i = 0;
  while (i < html.size()) {
    char c = html[i];
    if (c == '<') {
      if (html.compare(i, 4, "<!--") == 0) {
        auto end = html.find("-->", i + 4);
        i = end == std::string_view::npos ? html.size() : end + 3;
        continue;
      }
      if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
        auto end = html.find('>', i);
        i = end == std::string_view::npos ? html.size() : end + 1;
        continue;
      }
      auto tag = parse_tag(html, i);
      if (!tag) {
        out += c;
        ++i;
        continue;
      }
      if (!tag->closing && !tag->self_closing && is_skipped_element(tag->name)) {
        i = skip_element(html, *tag);
        out += kBreak;
        continue;
      }
      if (is_block_element(tag->name)) out += kBreak;
      else out += ' ';
      i = tag->end;
      continue;
    }
    if (c == '&') {
      if (auto used = decode_entity(html, i, out); used != 0) {
        i += used;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return normalize_paragraphs(out, false);
}

std::string media_type(std::string_view content_type) {
  auto semi = content_type.find(';');
  return to_lower_ascii(trim(content_type.substr(0, semi)));
}

}  // namespace

std::string_view to_string(FetchErrorKind kind) {
  switch (kind) {
    case FetchErrorKind::Timeout: return "timeout";
    case FetchErrorKind::Http: return "http";
    case FetchErrorKind::TooLarge: return "too_large";
    case FetchErrorKind::ContentType: return "content_type";
    case FetchErrorKind::Redirects: return "redirects";
    case FetchErrorKind::Robots: return "robots";
    case FetchErrorKind::Transport: return "transport";
    case FetchErrorKind::InvalidUrl: return "invalid_url";
  }
  return "unknown";
}

bool is_html_content_type(std::string_view content_type) {
  auto mt = media_type(content_type);
  return mt == "text/html" || mt == "application/xhtml+xml";
}

bool is_readable_content_type(std::string_view content_type) {
  return is_html_content_type(content_type) || media_type(content_type) == "text/plain";
}

std::string extract_text(const RawDocument& raw, std::size_t min_chars) {
  bool html = raw.content_type.empty() ? raw.body.find('<') != std::string::npos
                                       : is_html_content_type(raw.content_type);
  std::string text = html ? strip_html(raw.body) : normalize_paragraphs(raw.body, true);
  if (text.empty() || utf8_length(text) < min_chars)
    throw Error(ErrorCode::EmptyExtraction, "extracted text too short (" + std::to_string(utf8_length(text)) +
                                                " chars) from " + raw.url);
  return text;
}

// ---------------------------------------------------------------------------
// robots.txt

bool robots_allows(std::string_view robots_txt, std::string_view user_agent, std::string_view path) {
  std::string product = to_lower_ascii(user_agent.substr(0, user_agent.find('/')));

  struct Rule {
    bool allow;
    std::string prefix;
  };
  struct Group {
    std::vector<std::string> agents;
    std::vector<Rule> rules;
  };
  std::vector<Group> groups;
  bool last_was_agent = false;

  std::istringstream in{std::string(robots_txt)};
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    auto field = to_lower_ascii(trim(line.substr(0, colon)));
    auto value = trim(line.substr(colon + 1));
    if (field == "user-agent") {
      if (!last_was_agent) groups.emplace_back();
      groups.back().agents.push_back(to_lower_ascii(value));
      last_was_agent = true;
    } else if (field == "allow" || field == "disallow") {
      last_was_agent = false;
      if (groups.empty()) continue;
      // An empty Disallow allows everything.
      if (value.empty()) continue;
      groups.back().rules.push_back({field == "allow", value});
    } else {
      last_was_agent = false;
    }
  }

  const Group* chosen = nullptr;
  for (const auto& g : groups) {
    for (const auto& a : g.agents) {
      if (a != "*" && !product.empty() && product.find(a) != std::string::npos) chosen = &g;
    }
    if (chosen) break;
  }
  if (!chosen) {
    for (const auto& g : groups) {
      if (std::find(g.agents.begin(), g.agents.end(), "*") != g.agents.end()) {
        chosen = &g;
        break;
      }
    }
  }
  if (!chosen) return true;

  const Rule* best = nullptr;
  for (const auto& r : chosen->rules) {
    if (path.substr(0, r.prefix.size()) != r.prefix) continue;
    if (!best || r.prefix.size() > best->prefix.size() || (r.prefix.size() == best->prefix.size() && r.allow))
      best = &r;
  }
  return !best || best->allow;
}

// ---------------------------------------------------------------------------
// Fetchers

LivePageFetcher::LivePageFetcher(ReaderConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

bool LivePageFetcher::robots_allow(const Url& url) {
  const auto origin = url.origin();
  std::string robots;
  bool cached = false;
  {
    std::lock_guard lock(robots_mu_);
    if (auto it = robots_cache_.find(origin); it != robots_cache_.end()) {
      robots = it->second;
      cached = true;
    }
  }
  if (!cached) {
    HttpRequest req;
    req.url = origin + "/robots.txt";
    req.timeout = config_.timeout;
    req.max_body_bytes = 512 * 1024;
    req.headers.emplace_back("User-Agent", config_.user_agent);
    try {
      auto resp = transport_->send(req);
      if (resp.status >= 200 && resp.status < 300) robots = resp.body;
    } catch (const TransportFailure&) {
      // Unreachable robots.txt: treat as no restrictions.
    }
    std::lock_guard lock(robots_mu_);
    robots_cache_[origin] = robots;
  }
  return robots_allows(robots, config_.user_agent, url.target);
}

RawDocument LivePageFetcher::fetch(const std::string& url_text) {
  auto url = parse_url(url_text);
  if (!url) throw FetchError(FetchErrorKind::InvalidUrl, "invalid url: " + url_text);

  for (int redirects = 0;; ++redirects) {
    if (config_.honor_robots && !robots_allow(*url))
      throw FetchError(FetchErrorKind::Robots, "disallowed by robots.txt: " + url->str());

    HttpRequest req;
    req.url = url->str();
    req.timeout = config_.timeout;
    req.max_body_bytes = config_.max_bytes;
    req.headers.emplace_back("User-Agent", config_.user_agent);
    req.headers.emplace_back("Accept", "text/html,application/xhtml+xml,text/plain;q=0.9");

    HttpResponse resp;
    try {
      resp = transport_->send(req);
    } catch (const TransportFailure& e) {
      throw FetchError(e.timeout() ? FetchErrorKind::Timeout : FetchErrorKind::Transport, e.what());
    }

    if (resp.status >= 300 && resp.status < 400 && !resp.header("location").empty()) {
      if (redirects + 1 > config_.max_redirects)
        throw FetchError(FetchErrorKind::Redirects,
                         "too many redirects (" + std::to_string(redirects + 1) + ") from " + url_text, resp.status);
      auto next = resolve_url(*url, resp.header("location"));
      if (!next) throw FetchError(FetchErrorKind::Http, "bad redirect location from " + url->str(), resp.status);
      url = next;
      continue;
    }
    if (resp.status < 200 || resp.status >= 300)
      throw FetchError(FetchErrorKind::Http, "HTTP " + std::to_string(resp.status) + " for " + url->str(), resp.status);
    if (resp.too_large)
      throw FetchError(FetchErrorKind::TooLarge, "body exceeds " + std::to_string(config_.max_bytes) + " bytes");
    auto content_type = resp.header("content-type");
    if (!content_type.empty() && !is_readable_content_type(content_type))
      throw FetchError(FetchErrorKind::ContentType, "unsupported content type " + content_type);
    return RawDocument{url->str(), content_type, std::move(resp.body)};
  }
}

namespace {
std::string page_key(const std::string& url) { return sha256_hex(url); }
}  // namespace

RawDocument FixturePageFetcher::fetch(const std::string& url) {
  auto fixture = store_->get(kPagesKind, page_key(url));
  if (!fixture) throw Error(ErrorCode::FixtureMiss, "no page fixture for " + url);
  if (auto err = fixture->find("error"); err != fixture->end()) {
    auto kind_name = err->value("kind", std::string("transport"));
    auto kind = FetchErrorKind::Transport;
    for (auto k : {FetchErrorKind::Timeout, FetchErrorKind::Http, FetchErrorKind::TooLarge, FetchErrorKind::ContentType,
                   FetchErrorKind::Redirects, FetchErrorKind::Robots, FetchErrorKind::Transport,
                   FetchErrorKind::InvalidUrl}) {
      if (to_string(k) == kind_name) kind = k;
    }
    throw FetchError(kind, err->value("message", std::string("recorded fetch failure")), err->value("status", 0));
  }
  return RawDocument{fixture->value("final_url", url), fixture->value("content_type", std::string{}),
                     fixture->value("body", std::string{})};
}

RawDocument RecordingPageFetcher::fetch(const std::string& url) {
  try {
    auto doc = inner_->fetch(url);
    store_->put(kPagesKind, page_key(url),
                {{"url", url}, {"final_url", doc.url}, {"content_type", doc.content_type}, {"body", doc.body}});
    return doc;
  } catch (const FetchError& e) {
    store_->put(kPagesKind, page_key(url),
                {{"url", url},
                 {"error", {{"kind", std::string(to_string(e.kind()))}, {"status", e.status()}, {"message", e.what()}}}});
    throw;
  }
}

// ---------------------------------------------------------------------------

Document PageReader::acquire_document(const SearchResultMeta& result, std::string* fallback_reason) const {
  std::string reason;
  try {
    auto raw = fetcher_->fetch(result.url);
    auto text = extract_text(raw, config_.min_text_chars);
    return Document{result, utf8_truncate(text, config_.body_char_cap), Acquisition::FetchedPage};
  } catch (const FetchError& e) {
    reason = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyExtraction) throw;
    reason = std::string("empty_extraction: ") + e.what();
  }
  if (fallback_reason) *fallback_reason = reason;

  if (trim(result.snippet).empty())
    throw Error(ErrorCode::Unusable, "no page text and no snippet for " + result.url + " (" + reason + ")");
  std::string body = trim(result.title);
  if (!body.empty()) body += "\n\n";
  body += trim(result.snippet);
  return Document{result, utf8_truncate(body, config_.body_char_cap), Acquisition::SnippetFallback};
}

}  // namespace emulate
