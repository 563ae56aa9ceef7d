"""ceil(bytes/4) + number of ``` markers, for each fixture prompt."""
import json
import math
import sys

for line in open(sys.argv[1]):
    rec = json.loads(line)
    text = rec["prompt"].replace("\\'", "'").replace("\\t", "\t").encode()
    print(f"annexe{rec['annexe']}.tir{rec['tir']}", len(text), math.ceil(len(text) / 4) + text.count(b"```"))
