#include "ilora/simplify.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

// The tokenizer follows the HTML5 tag-open/tag-name/attribute states the way
// common lightweight parsers do: rawtext elements (script, style, iframe, ...)
// run to their matching end tag, and an unterminated construct at the end of
// input is left as it is.
namespace ilora::content {

namespace {

constexpr auto npos = std::string_view::npos;

constexpr std::array kVoid{std::string_view("img"), std::string_view("source"), std::string_view("embed")};
constexpr std::array kContainer{std::string_view("video"),  std::string_view("audio"),
                                std::string_view("picture"), std::string_view("iframe"),
                                std::string_view("object"),  std::string_view("script")};
constexpr std::array kRawText{std::string_view("script"),  std::string_view("style"),
                              std::string_view("xmp"),     std::string_view("iframe"),
                              std::string_view("noembed"), std::string_view("noframes"),
                              std::string_view("textarea"), std::string_view("title"),
                              std::string_view("plaintext")};

template <std::size_t N>
bool in(const std::array<std::string_view, N>& set, std::string_view name) {
  return std::find(set.begin(), set.end(), name) != set.end();
}

// whitespace as the tokenizer sees it
bool tag_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

// whitespace as attribute rewriting sees it
bool space(char c) { return tag_space(c) || c == '\v' || (c >= 0x1c && c <= 0x1f); }

bool alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool iequals_at(std::string_view s, std::size_t at, std::string_view word) {
  if (at + word.size() > s.size()) return false;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (lower(s[at + k]) != word[k]) return false;
  }
  return true;
}

std::string tag_name(std::string_view s, std::size_t from) {
  std::string name;
  for (std::size_t i = from; i < s.size() && !tag_space(s[i]) && s[i] != '/' && s[i] != '>'; ++i) {
    name.push_back(lower(s[i]));
  }
  return name;
}

// End (one past '>') of the tag whose name starts at `from`, or npos if the
// tag never closes.
std::size_t tag_end(std::string_view s, std::size_t from) {
  const std::size_t n = s.size();
  std::size_t i = from + 1;
  while (i < n && !tag_space(s[i]) && s[i] != '/' && s[i] != '>') ++i;
  for (;;) {
    while (i < n && (tag_space(s[i]) || s[i] == '/')) ++i;
    if (i >= n) return npos;
    if (s[i] == '>') return i + 1;
    const char prev = s[i - 1];
    if (prev != '"' && prev != '\'' && prev != '/' && !tag_space(prev)) return npos;
    ++i;
    while (i < n && !tag_space(s[i]) && s[i] != '/' && s[i] != '=' && s[i] != '>') ++i;

    std::size_t j = i;
    while (j < n && tag_space(s[j])) ++j;
    if (j >= n || s[j] != '=') continue;
    ++j;
    while (j < n && tag_space(s[j])) ++j;
    if (j < n && (s[j] == '"' || s[j] == '\'')) {
      const auto close = s.find(s[j], j + 1);
      if (close != npos) i = close + 1;  // else: no value, name stands alone
    } else {
      while (j < n && s[j] != '>' && !tag_space(s[j])) ++j;
      i = j;
    }
  }
}

// Start of the `</name` that ends a rawtext element, or npos.
std::size_t rawtext_end(std::string_view s, std::size_t from, std::string_view name) {
  for (auto p = s.find("</", from); p != npos; p = s.find("</", p + 1)) {
    const std::size_t after = p + 2 + name.size();
    if (after < s.size() && iequals_at(s, p + 2, name) && (tag_space(s[after]) || s[after] == '/' || s[after] == '>')) {
      return p;
    }
  }
  return npos;
}

std::size_t comment_end(std::string_view s, std::size_t i) {
  for (auto p = s.find("--", i + 4); p != npos; p = s.find("--", p + 1)) {
    if (p + 2 < s.size() && s[p + 2] == '>') return p + 3;
    if (p + 3 < s.size() && s[p + 2] == '!' && s[p + 3] == '>') return p + 4;
  }
  const std::string_view rest = s.substr(i + 4);
  if (rest.starts_with(">")) return i + 5;
  if (rest.starts_with("->")) return i + 6;
  return s.size();
}

std::size_t find_or_end(std::string_view s, std::string_view what, std::size_t from) {
  const auto p = s.find(what, from);
  return p == npos ? s.size() : p + what.size();
}

std::string_view lstrip(std::string_view v) {
  while (!v.empty() && space(v.front())) v.remove_prefix(1);
  return v;
}

// Rewrites one start tag. Attributes are read left to right and the first one
// that does not parse ends the rewrite; the remainder is kept as is.
std::string clean_tag(std::string_view raw) {
  std::size_t h = 2;
  while (h < raw.size() && !space(raw[h]) && raw[h] != '/' && raw[h] != '>') ++h;
  std::string out(raw.substr(0, h));
  const std::string_view rest = raw.substr(h);
  const std::size_t n = rest.size();

  std::size_t pos = 0;
  while (pos < n && space(rest[pos])) {
    std::size_t i = pos;
    while (i < n && space(rest[i])) ++i;
    const std::size_t name_at = i;
    while (i < n && !space(rest[i]) && rest[i] != '"' && rest[i] != '\'' && rest[i] != '>' && rest[i] != '/' &&
           rest[i] != '=') {
      ++i;
    }
    if (i == name_at) break;
    const std::string_view name = rest.substr(name_at, i - name_at);

    std::optional<std::string_view> value;
    std::size_t end = i;
    std::size_t j = i;
    while (j < n && space(rest[j])) ++j;
    if (j < n && rest[j] == '=') {
      ++j;
      while (j < n && space(rest[j])) ++j;
      if (j < n && (rest[j] == '"' || rest[j] == '\'')) {
        if (const auto close = rest.find(rest[j], j + 1); close != npos) {
          value = rest.substr(j + 1, close - j - 1);
          end = close + 1;
        }
      } else {
        std::size_t k = j;
        while (k < n && !space(rest[k]) && rest[k] != '"' && rest[k] != '\'' && rest[k] != '=' && rest[k] != '<' &&
               rest[k] != '>' && rest[k] != '`') {
          ++k;
        }
        if (k > j) {
          value = rest.substr(j, k - j);
          end = k;
        }
      }
    }

    const std::string_view attr = rest.substr(pos, end - pos);
    if (value && iequals_at(lstrip(*value), 0, "data:")) {
      // dropped with its leading whitespace
    } else if (value && name.size() == 5 && iequals_at(name, 0, "style")) {
      out += strip_css_data_urls(attr);
    } else {
      out += attr;
    }
    pos = end;
  }
  out += rest.substr(pos);
  return out;
}

}  // namespace

std::string strip_css_data_urls(std::string_view css) {
  std::string out;
  out.reserve(css.size());
  std::size_t i = 0;
  while (i < css.size()) {
    if (iequals_at(css, i, "url(")) {
      std::size_t j = i + 4;
      while (j < css.size() && space(css[j])) ++j;
      if (j < css.size() && (css[j] == '"' || css[j] == '\'')) ++j;
      while (j < css.size() && space(css[j])) ++j;
      if (iequals_at(css, j, "data:")) {
        if (const auto close = css.find(')', j + 5); close != npos) {
          out += "url()";
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(css[i++]);
  }
  return out;
}

std::string simplify_html(std::string_view s) {
  struct Skip {
    std::string name;
    int depth;
  };
  std::optional<Skip> skip;
  std::string out;
  out.reserve(s.size());
  const std::size_t n = s.size();
  auto keep = [&](std::size_t a, std::size_t b) {
    if (!skip && b > a) out.append(s.substr(a, b - a));
  };

  std::size_t i = 0;
  while (i < n) {
    const auto lt = s.find('<', i);
    if (lt == npos) {
      keep(i, n);
      break;
    }
    keep(i, lt);
    i = lt;

    if (i + 1 < n && alpha(s[i + 1])) {
      const std::size_t end = tag_end(s, i + 1);
      if (end == npos) {
        keep(i, n);
        break;
      }
      const std::string_view raw = s.substr(i, end - i);
      const std::string name = tag_name(s, i + 1);
      const bool self_closing = raw.ends_with("/>");
      i = end;

      if (skip) {
        // <x/> neither opens nor closes
        if (name == skip->name && !self_closing) ++skip->depth;
      } else if (in(kVoid, name)) {
        // dropped
      } else if (in(kContainer, name)) {
        if (!self_closing) skip = Skip{name, 1};
      } else {
        out += clean_tag(raw);
      }

      if (!self_closing && in(kRawText, name)) {
        std::size_t stop = name == "plaintext" ? npos : rawtext_end(s, i, name);
        if (stop == npos) stop = n;
        if (!skip) {
          const std::string_view text = s.substr(i, stop - i);
          out += name == "style" ? strip_css_data_urls(text) : std::string(text);
        }
        i = stop;
      }
      continue;
    }

    if (s.compare(i, 2, "</") == 0) {
      const auto gt = s.find('>', i + 2);
      if (gt == npos) {
        keep(i, n);
        break;
      }
      if (i + 2 < n && alpha(s[i + 2])) {
        const std::size_t end = tag_end(s, i + 2);
        if (end == npos) {
          keep(i, n);
          break;
        }
        const std::string name = tag_name(s, i + 2);
        // removal stops at the first '>' even if the tag itself runs longer
        const std::size_t cut = gt + 1;
        if (skip) {
          if (name == skip->name && --skip->depth == 0) {
            skip.reset();
            keep(cut, end);
          }
        } else if (in(kVoid, name) || in(kContainer, name)) {
          keep(cut, end);
        } else {
          keep(i, end);
        }
        i = end;
      } else {
        // "</>" is ignored, anything else up to '>' is a bogus comment
        const std::size_t end = s[i + 2] == '>' ? i + 3 : gt + 1;
        keep(i, end);
        i = end;
      }
      continue;
    }

    std::size_t end = i + 1;
    if (s.compare(i, 4, "<!--") == 0) {
      end = comment_end(s, i);
    } else if (s.compare(i, 9, "<![CDATA[") == 0) {
      end = find_or_end(s, "]]>", i + 9);
    } else if (s.compare(i, 2, "<!") == 0 || s.compare(i, 2, "<?") == 0) {
      end = find_or_end(s, ">", i + 2);
    }
    keep(i, end);
    i = end;
  }
  return out;
}

Bytes simplify_content(const Bytes& body, std::string_view content_type) {
  std::string type(content_type);
  std::transform(type.begin(), type.end(), type.begin(), lower);
  if (type.find("text/html") == std::string::npos) return body;
  const std::string html = simplify_html(std::string_view(reinterpret_cast<const char*>(body.data()), body.size()));
  return Bytes(html.begin(), html.end());
}

}  // namespace ilora::content
