import os, json, tqdm
from dotenv import load_dotenv
from models import MarkovSystemModel
from services.codec import nats, system_from_model
from services.entropy import gurevich_entropy, truncation_entropy

load_dotenv()
DATA = os.path.join(os.path.dirname(__file__), "..", "data", "sextic_system.json")
OUT = os.path.join(os.path.dirname(__file__), "..", "data", "truncation_sweep.json")

def run(max_depth=16, path=DATA, out=OUT):
    with open(path, "r", encoding="utf-8") as f:
        system = system_from_model(MarkovSystemModel.model_validate(json.load(f)))

    limit = gurevich_entropy(system).nats
    rows = []
    # one depth at a time so the bar tracks the slow deep truncations
    for depth in tqdm.tqdm(range(max_depth + 1)):
        h = truncation_entropy(system, depth)
        rows.append({"depth": depth, "nats": nats(h), "gap": nats(limit - h)})

    with open(out, "w", encoding="utf-8") as f:
        json.dump({"limit": nats(limit), "rows": rows}, f, indent=2, sort_keys=True)
    return rows

if __name__ == "__main__":
    run()
