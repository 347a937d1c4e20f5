# coding: utf-8

# # The three-machine scenario
#
# A suspect, a lawyer and a friend each have a mail store and a desktop. The
# generator writes that evidence plus a ground-truth table of which items are
# privileged and which method is expected to find them.

# In[1]:

import tempfile
from pathlib import Path

from privfilter.corpus import LAWYER, generate
from privfilter.ingest import scan_evidence
from privfilter.relations import (baseline_email_only, baseline_metadata, run_filter,
                                  seed_from_address, unique_md5s)
from privfilter.shingles import build_index

out = Path(tempfile.mkdtemp())
truth = generate(out, rng_seed=0)
truth.table_one()


# Counts are unique MD5s: (all, privileged) per category.

# In[2]:

corpus = scan_evidence(out / "evidence")
index = build_index(corpus)
print(len(corpus), "items,", len({i.md5 for i in corpus.items.values()}), "distinct MD5")


# ## Seeding on the lawyer's address

# In[3]:

seeds = seed_from_address(LAWYER, corpus)
print(len(seeds.from_items), "FROM items,", len(seeds.to_items), "TO items")


# Only the FROM side is expanded through duplicates, near-duplicates and
# chained duplicates. What the suspect sent to the lawyer is flagged but not
# followed, which keeps a bystander's copy of it out of the result.

# In[4]:

result = run_filter(seeds, corpus, index)
result.stats


# ## Against the metadata-only searches

# In[5]:

for label, found in [("e-mail only", baseline_email_only(LAWYER, corpus)),
                     ("metadata", baseline_metadata(LAWYER, corpus)),
                     ("script", result.privileged)]:
    print(f"{label:12s} {len(found):3d} items {len(unique_md5s(found, corpus)):3d} unique")


# The three extra uniques are the edited copy of file1, its PDF version and
# the forwarded e-mail 8, which carries no lawyer address at all.

# In[6]:

paths = {corpus[g].source_path for g in result.privileged}
for p in ["Suspect/Desktop/file1_1.docx", "Suspect/Desktop/file1_2.pdf",
          "Friend/Mail/Inbox/msg08.eml", "Friend/Desktop/file3.docx"]:
    print(p, p in paths)


# file3 on the friend's desktop stays unflagged: its only link to the lawyer is
# an attachment the suspect sent to the lawyer, i.e. the TO side.
