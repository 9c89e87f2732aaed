#!/usr/bin/env python3
"""Runs a ledger, a connector, two uplink nodes and an SPSP receiver as
separate processes on loopback TCP, then sends 100 units end to end."""

import json
import os
import signal
import subprocess
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
SCENARIO = os.path.join(HERE, "..", "..", "scenarios", "xrp_single_connector.json")


class Proc:
    def __init__(self, argv, log_dir, name):
        self.name = name
        self.err = open(os.path.join(log_dir, name + ".log"), "w")
        self.p = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=self.err, text=True)

    def ready(self):
        line = self.p.stdout.readline()
        if not line:
            raise RuntimeError(f"{self.name} exited before it was ready (code {self.p.wait()})")
        return json.loads(line)

    def stop(self):
        if self.p.poll() is None:
            self.p.send_signal(signal.SIGTERM)
        try:
            out, _ = self.p.communicate(timeout=10)
        except subprocess.TimeoutExpired:
            self.p.kill()
            out, _ = self.p.communicate()
        return out


def write(path, doc):
    with open(path, "w") as f:
        json.dump(doc, f)
    return path


def main():
    exe = sys.argv[1]
    spec = json.load(open(SCENARIO))
    procs = []
    with tempfile.TemporaryDirectory() as tmp:
        try:
            led = Proc([exe, "ledger", "start", write(f"{tmp}/ledger.json", spec["ledgers"][0]), "--port", "0"],
                       tmp, "ledger")
            procs.append(led)
            ledger_url = f"http://127.0.0.1:{led.ready()['port']}"

            conn_cfg = spec["connectors"][0]
            opts = conn_cfg["accounts"]["clients"]["options"]
            opts["xrpServer"] = ledger_url
            opts["port"] = 0
            conn = Proc([exe, "connector", "start", write(f"{tmp}/conn.json", conn_cfg)], tmp, "connector")
            procs.append(conn)
            btp_port = conn.ready()["ports"]["clients"]

            local = {}
            for n in spec["nodes"]:
                up = next(iter(n["config"]["uplinks"].values()))
                o = up["options"]
                o["xrpServer"] = ledger_url
                o["server"] = o["server"].replace("7443", str(btp_port))
                node = Proc([exe, "node", "start", write(f"{tmp}/{n['name']}.json", n["config"]), "--local-port", "0"],
                            tmp, "node-" + n["name"])
                procs.append(node)
                local[n["name"]] = node.ready()["local_port"]

            recv = Proc([exe, "spsp", "serve", "--node-port", str(local["bob"]), "--port", "0"], tmp, "spsp-serve")
            procs.append(recv)
            endpoint = recv.ready()["endpoint"]

            send = subprocess.run([exe, "spsp", "send", "--node-port", str(local["alice"]), "--receiver", endpoint,
                                   "--amount", "100", "--max-packet", "30"],
                                  capture_output=True, text=True, timeout=30)
            print(send.stdout)
            if send.returncode != 0:
                print(send.stderr, file=sys.stderr)
                print(f"spsp send exited {send.returncode}", file=sys.stderr)
                return 1
            report = json.loads(send.stdout)
            stream = report.get("stream", report)
            if stream.get("delivered") != 100 or stream.get("source_sent") != 100:
                print(f"unexpected report: {report}", file=sys.stderr)
                return 1

            out = recv.stop()
            received = json.loads(out.strip().splitlines()[-1])["received"]
            if received != 100:
                print(f"receiver got {received}", file=sys.stderr)
                return 1
            print("delivered 100 over TCP")
            return 0
        except Exception as e:
            print(f"smoke failed: {e}", file=sys.stderr)
            for p in procs:
                p.err.flush()
                print(f"--- {p.name}", file=sys.stderr)
                print(open(p.err.name).read()[-2000:], file=sys.stderr)
            return 1
        finally:
            for p in reversed(procs):
                p.stop()


if __name__ == "__main__":
    sys.exit(main())
