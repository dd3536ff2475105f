#!/usr/bin/env python3
"""Reference HTML simplification pass built on Python's html.parser.

Writes <name>.expected.html next to every <name>.html in the corpus directory.
Rules:
  * img, source, embed start tags are dropped.
  * video, audio, picture, iframe, object, script elements are dropped from
    the start tag through the matching end tag (to end of input if unclosed).
  * stray end tags of any of the above are dropped.
  * attributes whose value starts with "data:" are removed, including the
    whitespace before them.
  * url(data:...) in style attributes and <style> text becomes url().
Everything else is copied byte for byte.
"""
import pathlib
import re
import sys
from html.parser import HTMLParser

VOID = {"img", "source", "embed"}
CONTAINER = {"video", "audio", "picture", "iframe", "object", "script"}
ATTR_RE = re.compile(
    r"""(\s+)([^\s"'>/=]+)(\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s"'=<>`]+)))?""")
CSS_DATA_RE = re.compile(r"url\(\s*['\"]?\s*data:[^)]*\)", re.I)


def strip_css(text):
    return CSS_DATA_RE.sub("url()", text)


def clean_tag(raw):
    m = re.match(r"<[A-Za-z][^\s/>]*", raw)
    head, rest = raw[: m.end()], raw[m.end():]
    out, pos = [head], 0
    for a in ATTR_RE.finditer(rest):
        if a.start() != pos:
            break
        value = next((g for g in a.group(4, 5, 6) if g is not None), None)
        chunk = a.group(0)
        if value is not None and value.lstrip().lower().startswith("data:"):
            chunk = ""
        elif a.group(2).lower() == "style" and value is not None:
            chunk = strip_css(chunk)
        out.append(chunk)
        pos = a.end()
    out.append(rest[pos:])
    return "".join(out)


class Oracle(HTMLParser):
    def __init__(self, text):
        super().__init__(convert_charrefs=False)
        self.text = text
        self.line_starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self.line_starts.append(i + 1)
        self.edits = []        # (start, end, replacement)
        self.skip = None       # (name, depth, start)
        self.in_style = False

    def abs_pos(self):
        line, col = self.getpos()
        return self.line_starts[line - 1] + col

    def handle_starttag(self, tag, attrs):
        start = self.abs_pos()
        raw = self.get_starttag_text()
        end = start + len(raw)
        if self.skip:
            name, depth, s = self.skip
            if tag == name and not raw.endswith("/>"):
                self.skip = (name, depth + 1, s)
            return
        if tag in VOID:
            self.edits.append((start, end, ""))
        elif tag in CONTAINER:
            if raw.endswith("/>"):
                self.edits.append((start, end, ""))
            else:
                self.skip = (tag, 1, start)
        else:
            cleaned = clean_tag(raw)
            if cleaned != raw:
                self.edits.append((start, end, cleaned))
            self.in_style = tag == "style"

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag):
        start = self.abs_pos()
        end = self.text.index(">", start) + 1
        if self.skip:
            name, depth, s = self.skip
            if tag == name:
                depth -= 1
                self.skip = None if depth == 0 else (name, depth, s)
                if depth == 0:
                    self.edits.append((s, end, ""))
            return
        if tag in VOID or tag in CONTAINER:
            self.edits.append((start, end, ""))
        if tag == "style":
            self.in_style = False

    def handle_data(self, data):
        if self.in_style and not self.skip:
            start = self.abs_pos()
            cleaned = strip_css(data)
            if cleaned != data:
                self.edits.append((start, start + len(data), cleaned))

    def result(self):
        self.feed(self.text)
        self.close()
        if self.skip:
            self.edits.append((self.skip[2], len(self.text), ""))
        out, pos = [], 0
        for s, e, rep in sorted(self.edits):
            out.append(self.text[pos:s])
            out.append(rep)
            pos = e
        out.append(self.text[pos:])
        return "".join(out)


def main(corpus):
    for src in sorted(pathlib.Path(corpus).glob("*.html")):
        if src.name.endswith(".expected.html"):
            continue
        text = src.read_bytes().decode("utf-8")
        expected = Oracle(text).result()
        src.with_name(src.stem + ".expected.html").write_bytes(expected.encode("utf-8"))
        print(f"{src.name}: {len(text)} -> {len(expected)}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "../data/simplify")
