"""Character 8-gram overlap between a prompt's fenced example and response blocks."""
import json
import re
import sys

FENCE = re.compile(r"^( {0,4})```([^`]*)$")


def fenced(text):
    blocks, cur, indent = [], None, 0
    for line in text.split("\n"):
        m = FENCE.match(line)
        if cur is None:
            if m:
                cur, indent = [], len(m.group(1))
            continue
        if m and not m.group(2).strip():
            blocks.append("\n".join(l[min(indent, len(l) - len(l.lstrip(" "))):] for l in cur))
            cur = None
        else:
            cur.append(line)
    return blocks


def grams(s, n=8):
    s = " ".join(s.split())
    return {s[i:i + n] for i in range(len(s) - n + 1)}


def ratio(snippet, block):
    a, b = grams(snippet), grams(block)
    return len(a & b), len(a)


def unescape(s):
    return s.replace("\\'", "'").replace("\\t", "\t")


if __name__ == "__main__":
    for line in open(sys.argv[1]):
        rec = json.loads(line)
        snippets = fenced(unescape(rec["prompt"]))
        for i, block in enumerate(fenced(unescape(rec["response"]))):
            for s in snippets:
                shared, total = ratio(s, block)
                if shared / total >= 0.8:
                    print(f"annexe{rec['annexe']}.tir{rec['tir']} block {i}: {shared}/{total} = {shared / total:.6f}")
