import os, json, tqdm
from dotenv import load_dotenv
from models import SessionConfig
from services.codec import certificate_to_model, field_from_model, map_from_model, system_to_model
from services.julia_struct import build_partition, sextic_certificate

load_dotenv()
DATA = os.path.join(os.path.dirname(__file__), "..", "data")

def write(name: str, model):
    with open(os.path.join(DATA, name), "w", encoding="utf-8") as f:
        json.dump(model.model_dump(mode="json", exclude_none=True), f, indent=2, sort_keys=True)
        f.write("\n")

def run(config_name="sextic_config.json"):
    with open(os.path.join(DATA, config_name), "r", encoding="utf-8") as f:
        config = SessionConfig.model_validate(json.load(f))
    phi = map_from_model(field_from_model(config.field), config.map)

    builders = [
        (config.certificate or "sextic_certificate.json", lambda: certificate_to_model(sextic_certificate(phi))),
        (config.system or "sextic_system.json", lambda: system_to_model(build_partition(phi))),
    ]
    for name, build in tqdm.tqdm(builders):
        write(name, build())

if __name__ == "__main__":
    run()
