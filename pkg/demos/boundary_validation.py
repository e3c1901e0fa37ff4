# %% [markdown]
# # Validating messages at the service boundary
#
# The static checker cannot see inside values that arrive over the wire.
# Those are checked against the same declarations at runtime.

# %%
import json
from pathlib import Path

from refcheck import parse_json_value, parse_program, resolve, validate_named

schema = resolve(parse_program((Path(__file__).parent / "news_board.rj").read_text()))
GUID = "21EC2020-3AEA-4069-A2DD-08002B30309D"


def show(doc, type_name="user"):
    errors = validate_named(parse_json_value(json.dumps(doc)), type_name, schema)
    print(json.dumps(doc))
    for e in errors or ["valid"]:
        print("   ", e)


# %% [markdown]
# A well-formed user, then one who is exactly 18 (the predicate is strict).

# %%
show({"uid": GUID, "name": "Ada", "age": 30})
show({"uid": GUID, "name": "Ada", "age": 18})

# %% [markdown]
# Several problems are reported together, each with its path.

# %%
show({"uid": "not-a-guid", "age": "thirty", "nickname": "A"})

# %% [markdown]
# Repeated fields are JSON arrays. Paths index into them.

# %%
show({"post": [{"pid": GUID, "owner": GUID, "content": "hello"},
               {"pid": GUID[:-1], "owner": GUID, "content": "typo"}]}, "posts")

# %% [markdown]
# Errors serialize to JSON Pointer paths, which is what `refcheck validate` prints.

# %%
v = parse_json_value(json.dumps({"uid": GUID, "name": "Ada", "age": 7}))
print(json.dumps([e.to_json() for e in validate_named(v, "user", schema)], indent=2))
